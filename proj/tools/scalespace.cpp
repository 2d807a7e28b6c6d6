#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"
#include "scalespace/bifurcations.hpp"
#include "scalespace/contours.hpp"
#include "scalespace/errors.hpp"
#include "scalespace/ingest.hpp"
#include "scalespace/kernels.hpp"
#include "scalespace/spectral.hpp"
#include "scalespace/trees.hpp"

namespace fs = std::filesystem;
using nlohmann::ordered_json;
using namespace scalespace;

namespace {

enum Exit { kOk = 0, kInternal = 1, kConfig = 2, kIngestion = 3, kBudget = 4, kTopology = 5, kUnresolved = 6 };

int exit_code(ErrorClass cls) {
  switch (cls) {
    case ErrorClass::Config: return kConfig;
    case ErrorClass::Ingestion: return kIngestion;
    case ErrorClass::NumericBudget: return kBudget;
    case ErrorClass::Topology: return kTopology;
    case ErrorClass::UnresolvedScan: return kUnresolved;
  }
  return kInternal;
}

struct Options {
  std::string signal;
  std::string other;
  std::string field;
  std::string format;
  double padding = 1.0;
  std::size_t n = 0;
  double sigma_min = 0.02;
  double ratio = std::pow(1000.0, 1.0 / 62.0);
  std::size_t rows = 64;
  double alpha = 0.0;
  double beta = 1.0;
  double p = 0.0;
  int k = 1;
  double c = 0.0;
  bool relative = false;
  std::string out = ".";
  bool strict = false;
  double dead_band = 1e-12;
  // kernel
  double rho = 1.0;
  double z_max = 8.0;
  std::size_t count = 321;
  double sigma = 1.0;
  double omega_max = 10.0;
  // scan
  std::string axis = "p";
  std::optional<double> lo;
  std::optional<double> hi;
  std::size_t slices = 32;
  double tol_param = 1e-4;
  bool with_scan = false;
};

std::vector<double> ladder(const Options& o) {
  if (o.rows < 2) throw ConfigError("--rows must be at least 2");
  if (!(o.sigma_min > 0.0) || !(o.ratio > 1.0)) throw ConfigError("ladder needs sigma_min > 0 and ratio > 1");
  return geometric_sigma_ladder(o.sigma_min, o.ratio, o.rows - 1);
}

KernelParams kernel(const Options& o) {
  KernelParams kp{o.alpha, o.beta, o.p};
  kp.validate();
  return kp;
}

SignalGrid load(const std::string& path, const Options& o) {
  if (path.empty()) throw ConfigError("no signal given (--signal)");
  IngestOptions io;
  io.padding = o.padding;
  io.n = o.n;
  if (o.format.empty()) return ingest(path, io);
  if (o.format != "csv" && o.format != "json") throw ConfigError("--format must be csv or json");
  return ingest(path, o.format == "csv" ? SignalFormat::Csv : SignalFormat::Json, io);
}

ordered_json echo(const std::string& command, const Options& o) {
  ordered_json j;
  j["command"] = command;
  if (!o.field.empty()) {
    j["field"] = o.field;
  } else if (command != "kernel") {
    j["signal"] = o.signal;
    if (command == "compare") j["other"] = o.other;
    j["format"] = o.format.empty() ? "auto" : o.format;
    j["padding"] = o.padding;
    j["n"] = o.n;
    j["ladder"] = {{"sigma_min", o.sigma_min}, {"ratio", o.ratio}, {"rows", o.rows}};
  }
  j["kernel"] = {{"alpha", o.alpha}, {"beta", o.beta}, {"p", o.p}};
  if (command != "kernel") {
    j["k"] = o.k;
    j["dead_band"] = o.dead_band;
  }
  return j;
}

void write_file(const Options& o, const std::string& name, const std::string& content) {
  fs::create_directories(o.out);
  const fs::path path = fs::path(o.out) / name;
  std::ofstream f(path, std::ios::binary);
  if (!f) throw ConfigError("cannot write " + path.string());
  f << content;
  std::cout << "wrote " << path.string() << "\n";
}

// kernel and k as the field actually holds them
void echo_field(ordered_json& cfg, const FieldGrid& field) {
  cfg["kernel"] = {{"alpha", field.params.alpha}, {"beta", field.params.beta}, {"p", field.params.p}};
  cfg["k"] = field.k;
}

std::string csv_config_line(const ordered_json& cfg) { return "# config=" + cfg.dump() + "\n"; }

FieldGrid field_for(const SignalGrid& sig, const Options& o, const KernelParams& kp) {
  return synth_field(sig, kp, o.k, ladder(o));
}

FieldGrid load_or_synth_field(const Options& o) {
  if (!o.field.empty()) {
    std::ifstream in(o.field, std::ios::binary);
    if (!in) throw ConfigError("cannot open " + o.field);
    return parse_field_csv(in);
  }
  return field_for(load(o.signal, o), o, kernel(o));
}

ordered_json contours_summary(const ContourSet& set) {
  ordered_json comps = ordered_json::array();
  for (std::size_t i = 0; i < set.curves.size(); ++i) {
    const auto& cv = set.curves[i];
    comps.push_back({{"id", i},
                     {"kind", to_string(cv.kind)},
                     {"axis_crossings", cv.axis_crossings},
                     {"closed_loop", cv.closed_loop},
                     {"vertices", cv.vertices.size()}});
  }
  ordered_json flags = ordered_json::array();
  for (const auto& g : set.degeneracy_flags) flags.push_back({g.row, g.col});
  return {{"c", set.c},
          {"c_used", set.c_used},
          {"k", set.k},
          {"counts",
           {{"Closed", set.count(CurveKind::Closed)},
            {"Line", set.count(CurveKind::Line)},
            {"TruncatedAtWindow", set.count(CurveKind::TruncatedAtWindow)}}},
          {"degeneracy_flags", flags},
          {"components", comps}};
}

double resolve_level(const Options& o, const FieldGrid& field) { return o.relative ? o.c * field.scale() : o.c; }

ExtractOptions extract_opts(const Options& o) {
  if (!(o.dead_band > 0.0)) throw ConfigError("--dead-band must be positive");
  ExtractOptions e;
  e.dead_band = o.dead_band;
  return e;
}

struct TreeOut {
  ScaleTree tree;
  TreeSignature tt;
  TreeSignature tw;
};

TreeOut tree_of(const FieldGrid& field, const Options& o, double c) {
  const ContourSet set = extract_level_set(field, c, extract_opts(o));
  TreeOptions to;
  to.tolerate_truncated = !o.strict;
  TreeOut t{build_tree(set, to), {}, {}};
  t.tt = canonicalize(t.tree, false);
  t.tw = canonicalize(t.tree, true);
  return t;
}

int cmd_kernel(const Options& o) {
  const KernelParams kp = kernel(o);
  if (o.count < 2 || !(o.z_max > 0.0) || !(o.rho > 0.0) || !(o.omega_max > 0.0) || !(o.sigma >= 0.0)) {
    throw ConfigError("kernel sampling needs count >= 2 and positive extents");
  }
  const ordered_json cfg = [&] {
    ordered_json j = echo("kernel", o);
    j["rho"] = o.rho;
    j["z_max"] = o.z_max;
    j["count"] = o.count;
    j["sigma"] = o.sigma;
    j["omega_max"] = o.omega_max;
    return j;
  }();
  std::string kcsv = csv_config_line(cfg) + "z,even,odd,kernel\n";
  std::string tcsv = csv_config_line(cfg) + "omega,re,im\n";
  for (std::size_t i = 0; i < o.count; ++i) {
    const double t = -1.0 + 2.0 * static_cast<double>(i) / static_cast<double>(o.count - 1);
    const double z = t * o.z_max;
    kcsv += fmt17(z) + "," + fmt17(eval_profile_even(z, o.p)) + "," +
            fmt17(kp.alpha != 0.0 || o.p > 0.0 ? eval_profile_odd(z, o.p) : 0.0) + "," +
            fmt17(eval_kernel_stable(kp, z / o.rho, o.rho)) + "\n";
    const double w = t * o.omega_max;
    const auto h = transfer(kp, w, o.sigma);
    tcsv += fmt17(w) + "," + fmt17(h.real()) + "," + fmt17(h.imag()) + "\n";
  }
  write_file(o, "kernel.csv", kcsv);
  write_file(o, "transfer.csv", tcsv);
  return kOk;
}

int cmd_field(const Options& o) {
  const FieldGrid field = field_for(load(o.signal, o), o, kernel(o));
  write_file(o, "field.csv", csv_config_line(echo("field", o)) + field_csv(field));
  return kOk;
}

int cmd_contours(const Options& o) {
  const FieldGrid field = load_or_synth_field(o);
  const double c = resolve_level(o, field);
  const ContourSet set = extract_level_set(field, c, extract_opts(o));
  ordered_json cfg = echo("contours", o);
  echo_field(cfg, field);
  cfg["c"] = c;
  write_file(o, "contours.csv", csv_config_line(cfg) + contours_csv(set));
  ordered_json j;
  j["config"] = cfg;
  j.update(contours_summary(set));
  write_file(o, "contours.json", j.dump(2) + "\n");
  return kOk;
}

int cmd_tree(const Options& o) {
  const FieldGrid field = load_or_synth_field(o);
  const double c = resolve_level(o, field);
  const TreeOut t = tree_of(field, o, c);
  ordered_json cfg = echo("tree", o);
  echo_field(cfg, field);
  cfg["c"] = c;
  cfg["strict"] = o.strict;
  ordered_json j;
  j["config"] = cfg;
  j["tt"] = t.tt.canonical_form;
  j["tw"] = t.tw.canonical_form;
  j["skipped_truncated"] = t.tree.skipped_truncated;
  j["tree"] = ordered_json::parse(tree_json(t.tree));
  write_file(o, "tree.json", j.dump(2) + "\n");
  std::cout << t.tt.canonical_form << "\n";
  return kOk;
}

struct ScanOut {
  ParamScan cfg;
  ScanResult result;
  InvariantTable table;
  MorseReport morse;
  ordered_json echo;
};

ScanOut run_scan(const SignalGrid& sig, const Options& o, const std::string& command) {
  if (!o.lo || !o.hi) throw ConfigError("scan needs --lo and --hi");
  if (o.axis != "p" && o.axis != "c") throw ConfigError("--axis must be p or c");
  ScanOut s;
  ParamScan& cfg = s.cfg;
  cfg.axis = o.axis == "p" ? ScanAxis::P : ScanAxis::C;
  cfg.alpha = o.alpha;
  cfg.beta = o.beta;
  cfg.k = o.k;
  cfg.p = o.p;
  cfg.lo = *o.lo;
  cfg.hi = *o.hi;
  cfg.n_slices = o.slices;
  cfg.tol_param = o.tol_param;
  cfg.sigma_grid = ladder(o);
  double unit = 1.0;
  if (o.relative) {
    if (cfg.lo > cfg.hi) throw ConfigError("scan range is empty");
    const KernelParams base{o.alpha, o.beta, cfg.axis == ScanAxis::P ? cfg.lo : o.p};
    base.validate();
    unit = synth_field(sig, base, o.k, cfg.sigma_grid).scale();
  }
  if (cfg.axis == ScanAxis::P) {
    cfg.c = o.c * unit;
  } else {
    cfg.lo *= unit;
    cfg.hi *= unit;
  }
  s.echo = echo(command, o);
  s.echo["scan"] = {{"axis", o.axis}, {"lo", cfg.lo},           {"hi", cfg.hi},
                    {"c", cfg.c},     {"slices", cfg.n_slices}, {"tol_param", cfg.tol_param}};
  s.result = scan(sig, cfg);
  s.table = invariant_table(s.result.graph, s.result.events);
  s.morse = morse_report(s.result.graph, s.result.events);
  return s;
}

int cmd_scan(const Options& o) {
  const ScanOut s = run_scan(load(o.signal, o), o, "scan");
  write_file(o, "scan.json", scan_json(s.cfg, s.result, s.table, s.morse, s.echo.dump()));
  std::cout << s.result.events.size() << " events, morse " << (s.morse.pass ? "pass" : "FAIL") << "\n";
  return kOk;
}

ordered_json invariants_of(const ScanOut& s) {
  const ordered_json full = ordered_json::parse(scan_json(s.cfg, s.result, s.table, s.morse, s.echo.dump()));
  ordered_json j;
  j["config"] = full["config"];
  j["regions"] = full["regions"];
  j["morse"] = full["morse"];
  return j;
}

int cmd_invariants(const Options& o) {
  const ScanOut s = run_scan(load(o.signal, o), o, "invariants");
  write_file(o, "invariants.json", invariants_of(s).dump(2) + "\n");
  return kOk;
}

int cmd_compare(const Options& o) {
  if (o.other.empty()) throw ConfigError("compare needs --other");
  const SignalGrid a = load(o.signal, o);
  const SignalGrid b = load(o.other, o);
  const KernelParams kp = kernel(o);
  const FieldGrid fa = field_for(a, o, kp);
  const FieldGrid fb = field_for(b, o, kp);
  const TreeOut ta = tree_of(fa, o, resolve_level(o, fa));
  const TreeOut tb = tree_of(fb, o, resolve_level(o, fb));
  ordered_json cfg = echo("compare", o);
  cfg["c"] = o.c;
  cfg["relative"] = o.relative;
  ordered_json j;
  j["config"] = cfg;
  j["a"] = {{"tt", ta.tt.canonical_form}, {"tw", ta.tw.canonical_form}};
  j["b"] = {{"tt", tb.tt.canonical_form}, {"tw", tb.tw.canonical_form}};
  j["tt_equal"] = tree_equal(ta.tt, tb.tt);
  j["tw_equal"] = tree_equal(ta.tw, tb.tw);
  bool equal = tree_equal(ta.tt, tb.tt);
  if (o.with_scan) {
    const ScanOut sa = run_scan(a, o, "compare");
    const ScanOut sb = run_scan(b, o, "compare");
    const ordered_json ia = invariants_of(sa), ib = invariants_of(sb);
    ordered_json mus_a = ordered_json::array(), mus_b = ordered_json::array();
    for (const auto& r : ia["regions"]) mus_a.push_back(r["components"]);
    for (const auto& r : ib["regions"]) mus_b.push_back(r["components"]);
    const bool inv_equal = mus_a == mus_b && ia["morse"]["c"] == ib["morse"]["c"];
    j["invariants_equal"] = inv_equal;
    equal = equal && inv_equal;
  }
  j["verdict"] = equal ? "equal" : "different";
  write_file(o, "compare.json", j.dump(2) + "\n");
  std::cout << (equal ? "equal" : "different") << "\n";
  return kOk;
}

void add_signal(CLI::App* sub, Options& o) {
  sub->add_option("--signal", o.signal, "Signal file (.csv x,value or .json {x0, dx, samples})");
  sub->add_option("--format", o.format, "csv or json; default from the extension");
  sub->add_option("--padding", o.padding, "Minimum padded length as a multiple of the input");
  sub->add_option("--n", o.n, "Padded length (power of two)");
}

void add_ladder(CLI::App* sub, Options& o) {
  sub->add_option("--sigma-min", o.sigma_min, "Smallest nonzero scale");
  sub->add_option("--ratio", o.ratio, "Geometric ladder ratio");
  sub->add_option("--rows", o.rows, "Ladder rows including sigma = 0");
}

void add_kernel(CLI::App* sub, Options& o) {
  sub->add_option("--alpha", o.alpha, "Odd-part weight");
  sub->add_option("--beta", o.beta, "Even-part weight");
  sub->add_option("--p", o.p, "Kernel order");
}

void add_level(CLI::App* sub, Options& o) {
  sub->add_option("--k", o.k, "x-derivative order of the field");
  sub->add_option("--c", o.c, "Level");
  sub->add_flag("--relative", o.relative, "Levels are fractions of max |field|");
  sub->add_option("--dead-band", o.dead_band, "Relative dead band around the level");
}

void add_scan(CLI::App* sub, Options& o) {
  sub->add_option("--axis", o.axis, "Scanned parameter: p or c");
  sub->add_option("--lo", o.lo, "Range start");
  sub->add_option("--hi", o.hi, "Range end");
  sub->add_option("--slices", o.slices, "Initial slice count");
  sub->add_option("--tol-param", o.tol_param, "Bisection width for event brackets");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Scale-space topology of 1-D signals"};
  app.require_subcommand(1);
  app.fallthrough();
  Options o;
  std::string seed;
  app.add_option("--out", o.out, "Output directory");
  app.add_option("--seed", seed, "Rejected: nothing here is random");

  auto* kern = app.add_subcommand("kernel", "Sample kernel profiles and the transfer function");
  add_kernel(kern, o);
  kern->add_option("--rho", o.rho, "Kernel scale 1/sigma");
  kern->add_option("--z-max", o.z_max, "Sample z in [-z_max, z_max]");
  kern->add_option("--count", o.count, "Samples");
  kern->add_option("--sigma", o.sigma, "Scale for the transfer function");
  kern->add_option("--omega-max", o.omega_max, "Sample omega in [-omega_max, omega_max]");

  auto* field = app.add_subcommand("field", "Write the scale-space field as CSV");
  add_signal(field, o);
  add_ladder(field, o);
  add_kernel(field, o);
  field->add_option("--k", o.k, "x-derivative order");

  auto* cont = app.add_subcommand("contours", "Extract and classify one level set");
  add_signal(cont, o);
  cont->add_option("--field", o.field, "Field CSV from the field command");
  add_ladder(cont, o);
  add_kernel(cont, o);
  add_level(cont, o);

  auto* tree = app.add_subcommand("tree", "Build the contour tree and its signatures");
  add_signal(tree, o);
  tree->add_option("--field", o.field, "Field CSV from the field command");
  add_ladder(tree, o);
  add_kernel(tree, o);
  add_level(tree, o);
  tree->add_flag("--strict", o.strict, "Fail on contours cut by the window instead of skipping them");

  auto* sc = app.add_subcommand("scan", "Detect bifurcations across p or c");
  add_signal(sc, o);
  add_ladder(sc, o);
  add_kernel(sc, o);
  add_level(sc, o);
  add_scan(sc, o);

  auto* inv = app.add_subcommand("invariants", "Genus table and Morse checks of a scan");
  add_signal(inv, o);
  add_ladder(inv, o);
  add_kernel(inv, o);
  add_level(inv, o);
  add_scan(inv, o);

  auto* cmp = app.add_subcommand("compare", "Compare the trees (and optionally invariants) of two signals");
  add_signal(cmp, o);
  cmp->add_option("--other", o.other, "Second signal file");
  add_ladder(cmp, o);
  add_kernel(cmp, o);
  add_level(cmp, o);
  add_scan(cmp, o);
  cmp->add_flag("--strict", o.strict, "Fail on contours cut by the window instead of skipping them");
  cmp->add_flag("--with-scan", o.with_scan, "Also compare scan invariants");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kConfig;
  }

  try {
    if (app.count("--seed") > 0) throw ConfigError("--seed is not supported; every stage is deterministic");
    if (*kern) return cmd_kernel(o);
    if (*field) return cmd_field(o);
    if (*cont) return cmd_contours(o);
    if (*tree) return cmd_tree(o);
    if (*sc) return cmd_scan(o);
    if (*inv) return cmd_invariants(o);
    if (*cmp) return cmd_compare(o);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code(e.error_class());
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return kInternal;
  }
  return kInternal;
}
