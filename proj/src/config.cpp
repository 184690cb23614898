#include "chanfid/config.hpp"

#include <cctype>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>
#include <utility>

namespace chanfid {

namespace {

[[noreturn]] void cfg_fail(const std::string& msg) { fail(ErrorKind::config, msg); }

[[noreturn]] void cfg_fail_at(int line, const std::string& key, const std::string& msg) {
  cfg_fail("line " + std::to_string(line) + ": " + key + ": " + msg);
}

std::string trim(const std::string& s) {
  size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

struct Entry {
  std::string value;
  int line = 0;
  bool used = false;
};

class Bag {
 public:
  void insert(const std::string& key, const std::string& value, int line) {
    auto [it, fresh] = map_.try_emplace(key, Entry{value, line, false});
    if (!fresh)
      cfg_fail_at(line, key, "duplicate key (first assigned on line " +
                                 std::to_string(it->second.line) + ")");
  }

  const Entry* take(const std::string& key) {
    auto it = map_.find(key);
    if (it == map_.end()) return nullptr;
    it->second.used = true;
    return &it->second;
  }

  /// All entries whose key starts with `prefix + "."`; marks them used and
  /// returns (suffix, entry) pairs.
  std::vector<std::pair<std::string, const Entry*>> take_family(const std::string& prefix) {
    std::vector<std::pair<std::string, const Entry*>> out;
    const std::string p = prefix + ".";
    for (auto& [key, entry] : map_) {
      if (key.size() > p.size() && key.compare(0, p.size(), p) == 0) {
        entry.used = true;
        out.emplace_back(key.substr(p.size()), &entry);
      }
    }
    return out;
  }

  void finish() const {
    for (const auto& [key, entry] : map_) {
      if (!entry.used) cfg_fail_at(entry.line, key, "unknown key");
    }
  }

 private:
  std::map<std::string, Entry> map_;
};

double parse_double(const std::string& key, const Entry& e) {
  const char* begin = e.value.c_str();
  char* end = nullptr;
  const double v = std::strtod(begin, &end);
  if (end == begin || *end != '\0' || !std::isfinite(v))
    cfg_fail_at(e.line, key, "expected a finite number");
  return v;
}

long long parse_int(const std::string& key, const Entry& e) {
  const char* begin = e.value.c_str();
  char* end = nullptr;
  const long long v = std::strtoll(begin, &end, 10);
  if (end == begin || *end != '\0') cfg_fail_at(e.line, key, "expected an integer");
  return v;
}

std::uint64_t parse_u64(const std::string& key, const Entry& e) {
  const char* begin = e.value.c_str();
  char* end = nullptr;
  const unsigned long long v = std::strtoull(begin, &end, 10);
  if (end == begin || *end != '\0' || e.value[0] == '-')
    cfg_fail_at(e.line, key, "expected an unsigned integer");
  return v;
}

bool parse_bool(const std::string& key, const Entry& e) {
  if (e.value == "true") return true;
  if (e.value == "false") return false;
  cfg_fail_at(e.line, key, "expected true or false");
}

bool parse_index(const std::string& s, int* out) {
  if (s.empty()) return false;
  int v = 0;
  for (char c : s) {
    if (!std::isdigit(static_cast<unsigned char>(c))) return false;
    v = v * 10 + (c - '0');
    if (v > 1000000) return false;
  }
  *out = v;
  return true;
}

std::vector<std::string> split_dots(const std::string& s) {
  std::vector<std::string> out;
  size_t start = 0;
  while (true) {
    const size_t dot = s.find('.', start);
    if (dot == std::string::npos) {
      out.push_back(s.substr(start));
      return out;
    }
    out.push_back(s.substr(start, dot - start));
    start = dot + 1;
  }
}

/// Contiguously indexed family `prefix.<i>`; returns the values ordered by index.
std::vector<double> take_indexed(Bag& bag, const std::string& prefix) {
  std::map<int, double> byidx;
  for (auto& [suffix, entry] : bag.take_family(prefix)) {
    int idx = 0;
    if (!parse_index(suffix, &idx))
      cfg_fail_at(entry->line, prefix + "." + suffix, "expected an integer index suffix");
    byidx[idx] = parse_double(prefix + "." + suffix, *entry);
  }
  std::vector<double> out;
  int expect = 0;
  for (const auto& [idx, v] : byidx) {
    if (idx != expect)
      cfg_fail(prefix + ": indices must be contiguous from 0 (missing " + prefix + "." +
               std::to_string(expect) + ")");
    out.push_back(v);
    ++expect;
  }
  return out;
}

/// Sparse family `prefix.<i>` with default 0.0 and a fixed length.
std::vector<double> take_sparse(Bag& bag, const std::string& prefix, int n) {
  std::vector<double> out(n, 0.0);
  for (auto& [suffix, entry] : bag.take_family(prefix)) {
    int idx = 0;
    if (!parse_index(suffix, &idx))
      cfg_fail_at(entry->line, prefix + "." + suffix, "expected an integer index suffix");
    if (idx >= n)
      cfg_fail_at(entry->line, prefix + "." + suffix,
                  "index out of range (dimension is " + std::to_string(n) + ")");
    out[idx] = parse_double(prefix + "." + suffix, *entry);
  }
  return out;
}

/// Sparse matrix family `prefix.<i>.<j>`; absent mirror entries are filled
/// symmetrically.
std::vector<double> take_sparse_matrix(Bag& bag, const std::string& prefix, int n,
                                       bool mirror) {
  std::vector<double> out(static_cast<size_t>(n) * n, 0.0);
  std::vector<bool> set(out.size(), false);
  for (auto& [suffix, entry] : bag.take_family(prefix)) {
    const std::vector<std::string> parts = split_dots(suffix);
    int i = 0, j = 0;
    if (parts.size() != 2 || !parse_index(parts[0], &i) || !parse_index(parts[1], &j))
      cfg_fail_at(entry->line, prefix + "." + suffix, "expected two integer index suffixes");
    if (i >= n || j >= n)
      cfg_fail_at(entry->line, prefix + "." + suffix,
                  "index out of range (dimension is " + std::to_string(n) + ")");
    out[i * n + j] = parse_double(prefix + "." + suffix, *entry);
    set[i * n + j] = true;
  }
  if (mirror) {
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        if (set[i * n + j] && !set[j * n + i]) out[j * n + i] = out[i * n + j];
  }
  return out;
}

ComplexMatrix take_complex_matrix(Bag& bag, const std::string& prefix, int n) {
  ComplexMatrix m(n);
  for (auto& [suffix, entry] : bag.take_family(prefix)) {
    const std::vector<std::string> parts = split_dots(suffix);
    int r = 0, c = 0;
    if (parts.size() != 3 || !parse_index(parts[0], &r) || !parse_index(parts[1], &c) ||
        (parts[2] != "re" && parts[2] != "im"))
      cfg_fail_at(entry->line, prefix + "." + suffix, "expected <row>.<col>.re or .im");
    if (r >= n || c >= n)
      cfg_fail_at(entry->line, prefix + "." + suffix,
                  "index out of range (dimension is " + std::to_string(n) + ")");
    const double v = parse_double(prefix + "." + suffix, *entry);
    if (parts[2] == "re")
      m(r, c) = cplx(v, m(r, c).imag());
    else
      m(r, c) = cplx(m(r, c).real(), v);
  }
  return m;
}

ParamChannel build_channel(Bag& bag, const ControlVector& controls) {
  const Entry* kind = bag.take("channel.kind");
  if (!kind) cfg_fail("missing required key channel.kind");

  if (kind->value == "ion_trap") {
    return ParamChannel::ion_trap();
  }
  if (kind->value == "depolarizing") {
    bool strict = false;
    if (const Entry* s = bag.take("channel.strict")) strict = parse_bool("channel.strict", *s);
    std::vector<double> p = take_indexed(bag, "channel.p");
    if (p.empty()) p = controls;
    if (p.size() != 4) cfg_fail("channel.p: the depolarizing baseline needs 4 entries");
    return ParamChannel::depolarizing({p[0], p[1], p[2], p[3]}, strict);
  }
  if (kind->value == "unitary_generator") {
    int dim = 2;
    if (const Entry* d = bag.take("channel.dim"))
      dim = static_cast<int>(parse_int("channel.dim", *d));
    if (dim < 2 || dim > 8) cfg_fail("channel.dim: supported range is 2..8");
    const ComplexMatrix h = take_complex_matrix(bag, "channel.h", dim);
    try {
      return ParamChannel::unitary_generator(h);
    } catch (const Error& e) {
      cfg_fail(std::string("channel.h: ") + e.what());
    }
  }
  if (kind->value == "custom") {
    const Entry* de = bag.take("channel.dim");
    const Entry* ae = bag.take("channel.arity");
    const Entry* ke = bag.take("channel.kraus_count");
    if (!de || !ae || !ke)
      cfg_fail("custom channels require channel.dim, channel.arity and channel.kraus_count");
    const int dim = static_cast<int>(parse_int("channel.dim", *de));
    const int arity = static_cast<int>(parse_int("channel.arity", *ae));
    const int kraus = static_cast<int>(parse_int("channel.kraus_count", *ke));
    if (arity < 1 || arity > 16) cfg_fail("channel.arity: supported range is 1..16");

    std::map<int, PolyTerm> terms;
    for (auto& [suffix, entry] : bag.take_family("channel.term")) {
      const std::vector<std::string> parts = split_dots(suffix);
      int t = 0;
      if (parts.size() < 2 || !parse_index(parts[0], &t))
        cfg_fail_at(entry->line, "channel.term." + suffix, "expected channel.term.<t>.<field>");
      PolyTerm& term = terms.try_emplace(t, PolyTerm{}).first->second;
      if (term.powers.empty()) term.powers.assign(arity, 0);
      const std::string key = "channel.term." + suffix;
      if (parts.size() == 2 && parts[1] == "kraus")
        term.kraus = static_cast<int>(parse_int(key, *entry));
      else if (parts.size() == 2 && parts[1] == "row")
        term.row = static_cast<int>(parse_int(key, *entry));
      else if (parts.size() == 2 && parts[1] == "col")
        term.col = static_cast<int>(parse_int(key, *entry));
      else if (parts.size() == 2 && parts[1] == "re")
        term.coeff = cplx(parse_double(key, *entry), term.coeff.imag());
      else if (parts.size() == 2 && parts[1] == "im")
        term.coeff = cplx(term.coeff.real(), parse_double(key, *entry));
      else if (parts.size() == 3 && parts[1] == "pow") {
        int mu = 0;
        if (!parse_index(parts[2], &mu) || mu >= arity)
          cfg_fail_at(entry->line, key, "exponent index out of range");
        term.powers[mu] = static_cast<int>(parse_int(key, *entry));
      } else {
        cfg_fail_at(entry->line, key, "unknown term field");
      }
    }
    std::vector<PolyTerm> list;
    int expect = 0;
    for (auto& [t, term] : terms) {
      if (t != expect)
        cfg_fail("channel.term: indices must be contiguous from 0 (missing channel.term." +
                 std::to_string(expect) + ")");
      list.push_back(std::move(term));
      ++expect;
    }
    try {
      return ParamChannel::custom(dim, arity, kraus, std::move(list));
    } catch (const Error& e) {
      cfg_fail(std::string("channel.term: ") + e.what());
    }
  }
  cfg_fail_at(kind->line, "channel.kind",
              "unknown channel kind '" + kind->value +
                  "' (expected ion_trap, depolarizing, unitary_generator or custom)");
}

DensityMatrix read_state(Bag& bag, int dim) {
  std::vector<std::pair<std::string, const Entry*>> bloch = bag.take_family("state.bloch");
  std::vector<std::pair<std::string, const Entry*>> rho = bag.take_family("state.rho");
  if (!bloch.empty() && !rho.empty())
    cfg_fail("state: give either state.bloch.* or state.rho.*, not both");
  if (bloch.empty() && rho.empty())
    cfg_fail("missing state: set state.bloch.0..2 or state.rho.<r>.<c>.re/.im");
  if (!bloch.empty()) {
    if (dim != 2) cfg_fail("state.bloch: Bloch vectors describe dimension-2 states only");
    std::array<double, 3> v{0.0, 0.0, 0.0};
    std::array<bool, 3> seen{false, false, false};
    for (auto& [suffix, entry] : bloch) {
      int idx = 0;
      if (!parse_index(suffix, &idx) || idx > 2)
        cfg_fail_at(entry->line, "state.bloch." + suffix, "expected index 0, 1 or 2");
      v[idx] = parse_double("state.bloch." + suffix, *entry);
      seen[idx] = true;
    }
    if (!(seen[0] && seen[1] && seen[2]))
      cfg_fail("state.bloch: all three components must be given");
    try {
      return bloch_to_density(v);
    } catch (const Error& e) {
      cfg_fail(std::string("state.bloch: ") + e.what());
    }
  }
  ComplexMatrix m(dim);
  for (auto& [suffix, entry] : rho) {
    const std::vector<std::string> parts = split_dots(suffix);
    int r = 0, c = 0;
    if (parts.size() != 3 || !parse_index(parts[0], &r) || !parse_index(parts[1], &c) ||
        (parts[2] != "re" && parts[2] != "im"))
      cfg_fail_at(entry->line, "state.rho." + suffix, "expected <row>.<col>.re or .im");
    if (r >= dim || c >= dim)
      cfg_fail_at(entry->line, "state.rho." + suffix,
                  "index out of range (dimension is " + std::to_string(dim) + ")");
    const double v = parse_double("state.rho." + suffix, *entry);
    if (parts[2] == "re")
      m(r, c) = cplx(v, m(r, c).imag());
    else
      m(r, c) = cplx(m(r, c).real(), v);
  }
  try {
    return validate_density(m);
  } catch (const Error& e) {
    cfg_fail(std::string("state.rho: ") + e.what());
  }
}

FluctuationModel read_noise(Bag& bag, int arity) {
  const Entry* kind = bag.take("noise.kind");
  if (!kind) cfg_fail("missing required key noise.kind");
  const std::vector<double> mean = take_sparse(bag, "noise.mean", arity);
  const std::vector<double> cov = take_sparse_matrix(bag, "noise.cov", arity, /*mirror=*/true);
  try {
    if (kind->value == "deterministic_shift") {
      for (double c : cov)
        if (c != 0.0)
          cfg_fail_at(kind->line, "noise.cov", "deterministic_shift takes no covariance");
      return FluctuationModel::deterministic_shift(mean);
    }
    if (kind->value == "gaussian") return FluctuationModel::gaussian(mean, cov);
    if (kind->value == "uniform") return FluctuationModel::uniform(mean, cov);
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::config) throw;
    cfg_fail(std::string("noise: ") + e.what());
  }
  cfg_fail_at(kind->line, "noise.kind",
              "unknown noise kind '" + kind->value +
                  "' (expected deterministic_shift, gaussian or uniform)");
}

AveragingSpec read_averaging(Bag& bag, const ParamChannel& ch, const FluctuationModel& model) {
  const Entry* method = bag.take("averaging.method");
  if (!method) cfg_fail("missing required key averaging.method");
  AveragingSpec spec;
  if (method->value == "monte_carlo")
    spec.method = AveragingSpec::Method::monte_carlo;
  else if (method->value == "gauss_hermite")
    spec.method = AveragingSpec::Method::gauss_hermite;
  else if (method->value == "affine_exact")
    spec.method = AveragingSpec::Method::affine_exact;
  else
    cfg_fail_at(method->line, "averaging.method",
                "unknown method '" + method->value +
                    "' (expected monte_carlo, gauss_hermite or affine_exact)");

  if (const Entry* e = bag.take("averaging.samples")) {
    spec.samples = parse_int("averaging.samples", *e);
    if (spec.samples < 1) cfg_fail_at(e->line, "averaging.samples", "must be positive");
  }
  if (const Entry* e = bag.take("averaging.seed")) spec.seed = parse_u64("averaging.seed", *e);
  if (const Entry* e = bag.take("averaging.order")) {
    spec.order = static_cast<int>(parse_int("averaging.order", *e));
    if (spec.order < 1 || spec.order > 64)
      cfg_fail_at(e->line, "averaging.order", "supported range is 1..64");
  }
  if (const Entry* e = bag.take("averaging.shards")) {
    spec.shards = static_cast<int>(parse_int("averaging.shards", *e));
    if (spec.shards < 0) cfg_fail_at(e->line, "averaging.shards", "must be nonnegative");
  }

  if (spec.method == AveragingSpec::Method::gauss_hermite &&
      model.kind() != FluctuationModel::Kind::gaussian)
    cfg_fail_at(method->line, "averaging.method",
                "gauss_hermite requires noise.kind = gaussian");
  if (spec.method == AveragingSpec::Method::affine_exact && !ch.affine_in_controls())
    cfg_fail_at(method->line, "averaging.method",
                "affine_exact requires a channel that is affine in its controls");
  return spec;
}

}  // namespace

ExperimentConfig parse_config(const std::string& text) {
  Bag bag;
  {
    std::istringstream in(text);
    std::string raw;
    int ln = 0;
    while (std::getline(in, raw)) {
      ++ln;
      const size_t hash = raw.find('#');
      if (hash != std::string::npos) raw.erase(hash);
      const std::string line = trim(raw);
      if (line.empty()) continue;
      const size_t eq = line.find('=');
      if (eq == std::string::npos)
        cfg_fail("line " + std::to_string(ln) + ": expected 'key = value'");
      const std::string key = trim(line.substr(0, eq));
      const std::string value = trim(line.substr(eq + 1));
      if (key.empty() || value.empty())
        cfg_fail("line " + std::to_string(ln) + ": expected 'key = value'");
      bag.insert(key, value, ln);
    }
  }

  const std::vector<double> controls = take_indexed(bag, "controls");
  if (controls.empty()) cfg_fail("missing controls: set controls.0, controls.1, ...");

  ParamChannel channel = build_channel(bag, controls);
  if (static_cast<int>(controls.size()) != channel.arity())
    cfg_fail("controls: length " + std::to_string(controls.size()) +
             " does not match the channel arity " + std::to_string(channel.arity()));

  DensityMatrix state = read_state(bag, channel.dim());
  FluctuationModel model = read_noise(bag, channel.arity());
  AveragingSpec averaging = read_averaging(bag, channel, model);

  ExperimentConfig cfg{std::move(channel),  std::move(state), controls,
                       std::move(model),    std::move(averaging), PredictorKind::generic,
                       1e-4,                1e-3,             {},
                       {},                  ReportFormat::csv};

  if (const Entry* e = bag.take("predictor.kind")) {
    if (e->value == "generic")
      cfg.predictor = PredictorKind::generic;
    else if (e->value == "closed_form")
      cfg.predictor = PredictorKind::closed_form;
    else
      cfg_fail_at(e->line, "predictor.kind", "expected generic or closed_form");
  }
  if (cfg.predictor == PredictorKind::closed_form) {
    const bool ion = cfg.channel.kind() == ParamChannel::Kind::ion_trap;
    const bool depol = cfg.channel.kind() == ParamChannel::Kind::depolarizing;
    if (!ion && !depol)
      cfg_fail("predictor.kind: closed_form is only available for ion_trap and depolarizing");
    if (ion) {
      for (double m : cfg.model.mean())
        if (m != 0.0)
          cfg_fail("predictor.kind: the ion_trap closed form requires zero-mean noise");
    }
  }
  if (const Entry* e = bag.take("predictor.h1")) {
    cfg.h1 = parse_double("predictor.h1", *e);
    if (!(cfg.h1 > 0.0)) cfg_fail_at(e->line, "predictor.h1", "must be positive");
  }
  if (const Entry* e = bag.take("predictor.h2")) {
    cfg.h2 = parse_double("predictor.h2", *e);
    if (!(cfg.h2 > 0.0)) cfg_fail_at(e->line, "predictor.h2", "must be positive");
  }

  cfg.sweep = take_indexed(bag, "sweep");
  if (cfg.sweep.empty()) cfg_fail("missing sweep: set sweep.0, sweep.1, ...");
  for (size_t i = 0; i < cfg.sweep.size(); ++i) {
    if (!(cfg.sweep[i] > 0.0)) cfg_fail("sweep: scales must be > 0");
    if (i > 0 && !(cfg.sweep[i] > cfg.sweep[i - 1]))
      cfg_fail("sweep: scales must be strictly increasing");
  }

  if (const Entry* e = bag.take("output.path")) cfg.output_path = e->value;
  if (const Entry* e = bag.take("output.format")) {
    if (e->value == "csv")
      cfg.format = ReportFormat::csv;
    else if (e->value == "json")
      cfg.format = ReportFormat::json;
    else
      cfg_fail_at(e->line, "output.format", "expected csv or json");
  }

  bag.finish();
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) cfg_fail("cannot open config file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

}  // namespace chanfid
