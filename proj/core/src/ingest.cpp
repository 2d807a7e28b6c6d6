#include "scalespace/ingest.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>

#include "json.hpp"
#include "scalespace/errors.hpp"

namespace scalespace {

namespace {

bool parse_double(const std::string& s, double& out) {
  const char* begin = s.c_str();
  while (*begin == ' ' || *begin == '\t') ++begin;
  if (*begin == '\0') return false;
  char* end = nullptr;
  out = std::strtod(begin, &end);
  while (*end == ' ' || *end == '\t' || *end == '\r') ++end;
  return *end == '\0';
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, sep)) out.push_back(cell);
  return out;
}

std::size_t next_pow2(std::size_t n) {
  std::size_t p = 16;
  while (p < n) p *= 2;
  return p;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

std::string fmt17(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

SignalFormat format_from_path(const std::string& path) {
  auto ends = [&](const std::string& ext) {
    return path.size() >= ext.size() && path.compare(path.size() - ext.size(), ext.size(), ext) == 0;
  };
  if (ends(".csv")) return SignalFormat::Csv;
  if (ends(".json")) return SignalFormat::Json;
  throw ConfigError("cannot infer signal format from " + path + " (expected .csv or .json)");
}

void IngestOptions::validate() const {
  if (!(padding >= 1.0) || !std::isfinite(padding)) throw ConfigError("padding factor must be >= 1");
  if (n != 0 && (n < 16 || (n & (n - 1)) != 0)) throw ConfigError("N must be a power of two >= 16");
  if (!(uniform_rel_tol > 0.0) || !(edge_rel_tol > 0.0)) throw ConfigError("tolerances must be positive");
}

SignalGrid parse_signal_csv(std::istream& in, double rel_tol) {
  std::vector<double> xs, vs;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line == "\r" || line[0] == '#') continue;
    const auto cells = split(line, ',');
    double x = 0.0, v = 0.0;
    if (cells.size() != 2 || !parse_double(cells[0], x) || !parse_double(cells[1], v)) {
      if (xs.empty() && lineno == 1) continue;  // header
      throw MalformedInput("line " + std::to_string(lineno) + " is not an x,value pair");
    }
    xs.push_back(x);
    vs.push_back(v);
  }
  if (xs.size() < 2) throw MalformedInput("signal needs at least two samples");
  const double dx = (xs.back() - xs.front()) / static_cast<double>(xs.size() - 1);
  if (!(dx > 0.0)) throw NonUniformSampling("x must be strictly increasing");
  for (std::size_t i = 1; i < xs.size(); ++i) {
    const double step = xs[i] - xs[i - 1];
    if (std::abs(step - dx) > rel_tol * dx) {
      throw NonUniformSampling("step " + fmt17(step) + " at row " + std::to_string(i) + " differs from mean step " +
                               fmt17(dx));
    }
  }
  SignalGrid sig;
  sig.x0 = xs.front();
  sig.dx = dx;
  sig.samples = std::move(vs);
  return sig;
}

SignalGrid parse_signal_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw MalformedInput(std::string("signal JSON: ") + e.what());
  }
  SignalGrid sig;
  try {
    sig.x0 = j.at("x0").get<double>();
    sig.dx = j.at("dx").get<double>();
    sig.samples = j.at("samples").get<std::vector<double>>();
  } catch (const nlohmann::json::exception& e) {
    throw MalformedInput(std::string("signal JSON needs x0, dx, samples: ") + e.what());
  }
  if (!(sig.dx > 0.0)) throw NonUniformSampling("dx must be positive");
  if (sig.samples.size() < 2) throw MalformedInput("signal needs at least two samples");
  return sig;
}

SignalGrid prepare_signal(const SignalGrid& raw, const IngestOptions& opt) {
  opt.validate();
  for (double v : raw.samples) {
    if (!std::isfinite(v)) throw MalformedInput("non-finite sample");
  }
  const double scale = raw.scale();
  const double edge = std::max(std::abs(raw.samples.front()), std::abs(raw.samples.back()));
  if (scale == 0.0) throw NotTransient("signal is identically zero");
  if (edge >= opt.edge_rel_tol * scale) {
    throw NotTransient("edge magnitude " + fmt17(edge) + " = " + fmt17(edge / scale) + " * max|f| exceeds " +
                       fmt17(opt.edge_rel_tol) + " * max|f|");
  }
  const auto wanted = static_cast<std::size_t>(std::ceil(opt.padding * static_cast<double>(raw.size())));
  std::size_t n = next_pow2(wanted);
  if (opt.n != 0) {
    if (opt.n < wanted) {
      throw ConfigError("N = " + std::to_string(opt.n) + " is below the padded length " + std::to_string(wanted));
    }
    n = opt.n;
  }
  const std::size_t left = (n - raw.size()) / 2;
  SignalGrid sig;
  sig.dx = raw.dx;
  sig.x0 = raw.x0 - static_cast<double>(left) * raw.dx;
  sig.samples.assign(n, 0.0);
  std::copy(raw.samples.begin(), raw.samples.end(), sig.samples.begin() + static_cast<std::ptrdiff_t>(left));
  sig.validate();
  return sig;
}

SignalGrid ingest(const std::string& path, SignalFormat format, const IngestOptions& opt) {
  opt.validate();
  const std::string text = read_file(path);
  if (format == SignalFormat::Json) return prepare_signal(parse_signal_json(text), opt);
  std::istringstream in(text);
  return prepare_signal(parse_signal_csv(in, opt.uniform_rel_tol), opt);
}

SignalGrid ingest(const std::string& path, const IngestOptions& opt) {
  return ingest(path, format_from_path(path), opt);
}

std::string signal_json(const SignalGrid& sig) {
  nlohmann::ordered_json j;
  j["x0"] = sig.x0;
  j["dx"] = sig.dx;
  j["samples"] = sig.samples;
  return j.dump() + "\n";
}

std::string signal_csv(const SignalGrid& sig) {
  std::string out = "x,value\n";
  for (std::size_t i = 0; i < sig.size(); ++i) out += fmt17(sig.x(i)) + "," + fmt17(sig.samples[i]) + "\n";
  return out;
}

std::string field_csv(const FieldGrid& field) {
  std::string out;
  out += "# x0=" + fmt17(field.x0) + "\n";
  out += "# dx=" + fmt17(field.dx) + "\n";
  out += "# n=" + std::to_string(field.n) + "\n";
  out += "# k=" + std::to_string(field.k) + "\n";
  out += "# alpha=" + fmt17(field.params.alpha) + "\n";
  out += "# beta=" + fmt17(field.params.beta) + "\n";
  out += "# p=" + fmt17(field.params.p) + "\n";
  out += "sigma_index,sigma,x,value\n";
  for (std::size_t r = 0; r < field.rows(); ++r) {
    const std::string head = std::to_string(r) + "," + fmt17(field.sigma[r]) + ",";
    for (std::size_t i = 0; i < field.n; ++i) out += head + fmt17(field.x(i)) + "," + fmt17(field.at(r, i)) + "\n";
  }
  return out;
}

FieldGrid parse_field_csv(std::istream& in) {
  std::map<std::string, std::string> meta;
  FieldGrid field;
  std::string line;
  bool header = false;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line[0] == '#') {
      const auto eq = line.find('=');
      if (eq != std::string::npos) meta[line.substr(2, eq - 2)] = line.substr(eq + 1);
      continue;
    }
    if (!header) {
      header = true;
      for (const char* key : {"x0", "dx", "n", "k", "alpha", "beta", "p"}) {
        if (!meta.count(key)) throw MalformedInput(std::string("field CSV lacks # ") + key);
      }
      field.x0 = std::strtod(meta["x0"].c_str(), nullptr);
      field.dx = std::strtod(meta["dx"].c_str(), nullptr);
      field.n = std::strtoul(meta["n"].c_str(), nullptr, 10);
      field.k = std::atoi(meta["k"].c_str());
      field.params = {std::strtod(meta["alpha"].c_str(), nullptr), std::strtod(meta["beta"].c_str(), nullptr),
                      std::strtod(meta["p"].c_str(), nullptr)};
      continue;
    }
    const auto cells = split(line, ',');
    double idx = 0.0, sigma = 0.0, x = 0.0, v = 0.0;
    if (cells.size() != 4 || !parse_double(cells[0], idx) || !parse_double(cells[1], sigma) ||
        !parse_double(cells[2], x) || !parse_double(cells[3], v)) {
      throw MalformedInput("bad field row: " + line);
    }
    const auto row = static_cast<std::size_t>(idx);
    if (row == field.sigma.size()) field.sigma.push_back(sigma);
    if (row + 1 != field.sigma.size()) throw MalformedInput("field rows out of order");
    field.values.push_back(v);
  }
  if (field.n == 0 || field.values.size() != field.n * field.sigma.size()) {
    throw MalformedInput("field CSV has " + std::to_string(field.values.size()) + " values for " +
                         std::to_string(field.sigma.size()) + " rows of " + std::to_string(field.n));
  }
  return field;
}

}  // namespace scalespace
