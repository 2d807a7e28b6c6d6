#include <sstream>

#include "doctest.h"
#include "fixtures.hpp"
#include "scalespace/errors.hpp"
#include "scalespace/ingest.hpp"

using namespace scalespace;

namespace {

std::string fixture(const std::string& name) { return std::string(SCALESPACE_FIXTURE_DIR) + "/" + name; }

}  // namespace

TEST_CASE("fixture files load at their native length") {
  const SignalGrid s = ingest(fixture("s2.json"));
  CHECK(s.size() == fixtures::kN);
  CHECK(s.x0 == fixtures::kX0);
  CHECK(s.dx == doctest::Approx(fixtures::kDx).epsilon(1e-15));
  const SignalGrid ref = fixtures::signal(fixtures::kS2);
  for (std::size_t i = 0; i < s.size(); ++i) CHECK(std::abs(s.samples[i] - ref.samples[i]) <= 1e-15);
  const SignalGrid c = ingest(fixture("s1.csv"));
  CHECK(c.size() == fixtures::kN);
  CHECK(c.dx == doctest::Approx(fixtures::kDx).epsilon(1e-12));
}

TEST_CASE("padding is symmetric and keeps the grid") {
  IngestOptions opt;
  opt.padding = 2.0;
  const SignalGrid s = ingest(fixture("s1.json"), opt);
  CHECK(s.size() == 2 * fixtures::kN);
  CHECK(s.x0 == doctest::Approx(fixtures::kX0 - 1024 * fixtures::kDx));
  CHECK(s.samples[1024 + 1024] == doctest::Approx(fixtures::bumps(fixtures::kS1, fixtures::kX0 + 1024 * fixtures::kDx)));
  opt.padding = 1.0;
  opt.n = 1024;
  CHECK_THROWS_AS(ingest(fixture("s1.json"), opt), ConfigError);
}

TEST_CASE("csv parsing") {
  std::istringstream ok("x,value\n# note\n0,1\n0.5,2\n1.0,3\n");
  const SignalGrid s = parse_signal_csv(ok);
  CHECK(s.size() == 3);
  CHECK(s.dx == 0.5);
  std::istringstream junk("0,1\n0.5,abc\n");
  CHECK_THROWS_AS(parse_signal_csv(junk), MalformedInput);
  std::istringstream back("0,1\n-0.5,2\n");
  CHECK_THROWS_AS(parse_signal_csv(back), NonUniformSampling);
  CHECK_THROWS_AS(ingest(fixture("jittered.csv")), NonUniformSampling);
}

TEST_CASE("signals that do not decay are refused") {
  CHECK_THROWS_AS(ingest(fixture("s2_window10.json")), NotTransient);
  SignalGrid zero = fixtures::signal(fixtures::kS1);
  std::fill(zero.samples.begin(), zero.samples.end(), 0.0);
  CHECK_THROWS_AS(prepare_signal(zero), NotTransient);
  SignalGrid nan = fixtures::signal(fixtures::kS1);
  nan.samples[5] = std::nan("");
  CHECK_THROWS_AS(prepare_signal(nan), Error);
}

TEST_CASE("formats and missing files") {
  CHECK(format_from_path("a/b.csv") == SignalFormat::Csv);
  CHECK(format_from_path("x.json") == SignalFormat::Json);
  CHECK_THROWS_AS(format_from_path("x.txt"), ConfigError);
  CHECK_THROWS_AS(ingest(fixture("absent.json")), ConfigError);
  IngestOptions bad;
  bad.padding = 0.5;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
}

TEST_CASE("signal writers round trip") {
  const SignalGrid s = fixtures::signal(fixtures::kS3);
  const SignalGrid j = parse_signal_json(signal_json(s));
  CHECK(j.samples == s.samples);
  CHECK(j.x0 == s.x0);
  CHECK(j.dx == s.dx);
  std::istringstream in(signal_csv(s));
  const SignalGrid c = parse_signal_csv(in);
  CHECK(c.samples == s.samples);
}

TEST_CASE("field CSV round trip is bit exact") {
  const FieldGrid f = synth_field(fixtures::signal(fixtures::kS2), KernelParams{0.5, 1.0, 0.7}, 1,
                                  geometric_sigma_ladder(0.05, 1.5, 10));
  std::istringstream in("# config={}\n" + field_csv(f));
  const FieldGrid g = parse_field_csv(in);
  CHECK(g.values == f.values);
  CHECK(g.sigma == f.sigma);
  CHECK(g.x0 == f.x0);
  CHECK(g.dx == f.dx);
  CHECK(g.k == 1);
  CHECK(g.params.alpha == 0.5);
  CHECK(g.params.p == 0.7);
  CHECK(fmt17(0.1) == "0.10000000000000001");
}
