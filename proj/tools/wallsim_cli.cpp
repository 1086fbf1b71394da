// wallsim: simulation, exact verification, correlation kernels and
// asymptotic diagnostics from the command line.

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <string>
#include <unistd.h>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include <wallsim/asymptotics.hpp>
#include <wallsim/correlation.hpp>
#include <wallsim/dynamics.hpp>
#include <wallsim/errors.hpp>
#include <wallsim/stats.hpp>
#include <wallsim/verify.hpp>

namespace {

using nlohmann::json;
using namespace wallsim;

enum Exit { ok = 0, invalid = 2, numerical = 3, verification = 4, inconclusive = 5 };

struct ConfigError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// ---------------------------------------------------------------------------
// Settings: defaults, then the JSON config file, then flags.

struct Key {
  const char *name;
  json fallback;
  const char *help;
};

const std::vector<Key> &keys() {
  static const std::vector<Key> k = {
      {"q", 0.5, "geometric parameter in (0,1)"},
      {"K", 4, "number of levels"},
      {"steps", 10, "integer time steps"},
      {"replicas", 1, "independent replicas"},
      {"seed", 0, "RNG seed"},
      {"threads", 0, "worker threads (0: WALLSIM_THREADS or hardware)"},
      {"record", "integer", "simulate: half | integer | final"},
      {"wall", "half", "odd-level wall reference: half | literal"},
      {"draws", "", "simulate: JSON draw table replacing the RNG"},
      {"out", "-", "output path ('-' for stdout)"},
      {"T", 1, "kernel time"},
      {"points", "(0,1)", "space points \"(s,k);(t,m);...\""},
      {"radius", 2.0, "contour radius (> 1)"},
      {"x_nodes", 128, "initial x quadrature nodes"},
      {"u_nodes", 128, "initial contour nodes"},
      {"tolerance", 1e-11, "kernel quadrature tolerance"},
      {"route", "residue", "kernel route: residue | contour"},
      {"quad_nodes", 256, "initial nodes for inner products"},
      {"quad_tolerance", 1e-12, "inner product quadrature tolerance"},
      {"k", 3, "verify intertwining: level"},
      {"M", 5, "verify intertwining: truncation"},
      {"q_exact", "1/2", "verify intertwining/sp: exact q"},
      {"q_list", "1/4,1/3,1/2,2/3", "verify keyidentity/psame: q values"},
      {"bound", 8, "verify keyidentity: parameter bound"},
      {"id", 0, "verify keyidentity: identity 1..4 (0: all)"},
      {"k_max", 0, "verify branching/psame/sp: largest level (0: check default)"},
      {"cap", 0, "verify branching/psame/sp: largest part (0: check default)"},
      {"tail_tolerance", 1e-8, "verify intertwining: row mass threshold"},
      {"all_entries", false, "verify intertwining: grade all entries if no row is conclusive"},
      {"residual_tolerance", 1e-10, "verify: largest accepted floating residual"},
      {"dump", "", "verify psame: CSV kernel dump path"},
      {"N", "50,100,200", "asymptotics: N values"},
      {"limit_points", "1,0", "asymptotics pearcey: \"nu,eta;nu,eta;...\""},
      {"a", "", "asymptotics: Jacobi parameters per point (+ or -), default +"},
      {"t", 1.0, "asymptotics jacobi: T/N"},
      {"l", 0.1, "asymptotics jacobi: r/N"},
      {"s", "0", "asymptotics jacobi: degrees \"s1,s2,...\""},
      {"r_offsets", "0", "asymptotics jacobi: fixed r differences"},
  };
  return k;
}

const Key *find_key(const std::string &name) {
  for (const auto &k : keys())
    if (name == k.name)
      return &k;
  return nullptr;
}

json coerce(const Key &key, const std::string &text) {
  try {
    if (key.fallback.is_boolean()) {
      if (text == "true" || text == "1")
        return true;
      if (text == "false" || text == "0")
        return false;
      throw std::invalid_argument("");
    }
    if (key.fallback.is_number_integer()) {
      std::size_t used = 0;
      const long long v = std::stoll(text, &used);
      if (used != text.size())
        throw std::invalid_argument("");
      return v;
    }
    if (key.fallback.is_number_float()) {
      std::size_t used = 0;
      const double v = std::stod(text, &used);
      if (used != text.size())
        throw std::invalid_argument("");
      return v;
    }
  } catch (const std::exception &) {
    throw ConfigError(std::string(key.name) + ": cannot parse '" + text + "'");
  }
  return text;
}

struct Settings {
  json values = json::object();

  template <typename T> T get(const char *name) const { return values.at(name).get<T>(); }
  // Everything except where output goes and how many threads produce it.
  json run_params() const {
    json p = values;
    p.erase("out");
    p.erase("threads");
    return p;
  }

  std::string hash() const {
    // FNV-1a over the canonical (key-sorted) dump
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : run_params().dump()) {
      h ^= c;
      h *= 0x100000001b3ULL;
    }
    std::ostringstream os;
    os << std::hex << std::setw(16) << std::setfill('0') << h;
    return os.str();
  }
};

Settings load_settings(const std::string &config_path, const std::map<std::string, std::string> &flags) {
  Settings s;
  for (const auto &k : keys())
    s.values[k.name] = k.fallback;
  std::vector<std::string> problems;
  if (!config_path.empty()) {
    std::ifstream in(config_path);
    if (!in)
      throw ConfigError("cannot open config file " + config_path);
    json file;
    try {
      in >> file;
    } catch (const json::exception &e) {
      throw ConfigError(std::string("config file is not valid JSON: ") + e.what());
    }
    if (!file.is_object())
      throw ConfigError("config file must hold a JSON object");
    for (const auto &[name, value] : file.items()) {
      const Key *key = find_key(name);
      if (!key) {
        problems.push_back("unknown key '" + name + "'");
        continue;
      }
      const bool same_kind = (key->fallback.is_number() && value.is_number() &&
                              (key->fallback.is_number_float() || value.is_number_integer())) ||
                             (key->fallback.is_string() && value.is_string()) ||
                             (key->fallback.is_boolean() && value.is_boolean());
      if (!same_kind) {
        problems.push_back("key '" + name + "' has the wrong type");
        continue;
      }
      s.values[name] = key->fallback.is_number_float() ? json(value.get<double>()) : value;
    }
  }
  for (const auto &[name, text] : flags) {
    try {
      s.values[name] = coerce(*find_key(name), text);
    } catch (const ConfigError &e) {
      problems.push_back(e.what());
    }
  }
  if (!problems.empty()) {
    std::string msg = "invalid configuration:";
    for (const auto &p : problems)
      msg += "\n  - " + p;
    throw ConfigError(msg);
  }
  return s;
}

/// Every constraint violation at once.
void validate(const Settings &s) {
  std::vector<std::string> v;
  const double q = s.get<double>("q");
  if (!(q > 0.0 && q < 1.0))
    v.push_back("q = " + std::to_string(q) + " must lie in the open interval (0,1)");
  if (s.get<long long>("K") < 1)
    v.push_back("K must be >= 1");
  if (s.get<long long>("steps") < 0)
    v.push_back("steps must be >= 0");
  if (s.get<long long>("replicas") < 1)
    v.push_back("replicas must be >= 1");
  if (s.get<long long>("seed") < 0)
    v.push_back("seed must be >= 0");
  if (s.get<long long>("threads") < 0)
    v.push_back("threads must be >= 0");
  const auto record = s.get<std::string>("record");
  if (record != "half" && record != "integer" && record != "final")
    v.push_back("record must be half, integer or final");
  const auto wall = s.get<std::string>("wall");
  if (wall != "half" && wall != "literal")
    v.push_back("wall must be half or literal");
  if (s.get<long long>("T") < 0)
    v.push_back("T must be >= 0");
  if (!(s.get<double>("radius") > 1.0))
    v.push_back("radius must exceed 1");
  for (const char *n : {"x_nodes", "u_nodes", "quad_nodes"})
    if (s.get<long long>(n) < 1)
      v.push_back(std::string(n) + " must be >= 1");
  for (const char *n : {"tolerance", "quad_tolerance", "tail_tolerance", "residual_tolerance"})
    if (!(s.get<double>(n) > 0.0))
      v.push_back(std::string(n) + " must be positive");
  const auto route = s.get<std::string>("route");
  if (route != "residue" && route != "contour")
    v.push_back("route must be residue or contour");
  if (s.get<long long>("k") < 2)
    v.push_back("k must be >= 2");
  if (s.get<long long>("M") < 0)
    v.push_back("M must be >= 0");
  if (s.get<long long>("bound") < 0)
    v.push_back("bound must be >= 0");
  const auto id = s.get<long long>("id");
  if (id < 0 || id > 4)
    v.push_back("id must be 0..4");
  if (s.get<long long>("k_max") < 0 || s.get<long long>("cap") < 0)
    v.push_back("k_max and cap must be >= 0");
  if (!(s.get<double>("t") > 0.0) || !(s.get<double>("l") > 0.0))
    v.push_back("t and l must be positive");
  if (!v.empty()) {
    std::string msg = "invalid configuration:";
    for (const auto &p : v)
      msg += "\n  - " + p;
    throw ConfigError(msg);
  }
}

// ---------------------------------------------------------------------------
// Output

/// Writes to a temporary file next to the target and renames it into place.
class AtomicOutput {
public:
  explicit AtomicOutput(std::string path) : path_(std::move(path)) {
    if (path_ != "-") {
      tmp_ = path_ + ".tmp." + std::to_string(::getpid());
      file_.open(tmp_, std::ios::binary | std::ios::trunc);
      if (!file_)
        throw ConfigError("cannot write " + path_);
    }
  }
  ~AtomicOutput() {
    if (!committed_ && !tmp_.empty()) {
      file_.close();
      std::error_code ec;
      std::filesystem::remove(tmp_, ec);
    }
  }
  std::ostream &stream() { return path_ == "-" ? std::cout : file_; }
  void commit() {
    if (path_ == "-") {
      std::cout.flush();
    } else {
      file_.close();
      if (!file_)
        throw std::runtime_error("failed writing " + tmp_);
      std::filesystem::rename(tmp_, path_);
    }
    committed_ = true;
  }

private:
  std::string path_, tmp_;
  std::ofstream file_;
  bool committed_ = false;
};

json meta(const Settings &s, const std::string &command) {
  return {{"command", command}, {"config_hash", s.hash()}, {"seed", s.get<long long>("seed")}};
}

std::string csv_header_comment(const Settings &s, const std::string &command) {
  return "# wallsim " + command + " config_hash=" + s.hash() + " seed=" + std::to_string(s.get<long long>("seed")) +
         "\n";
}

std::string fmt(double v) {
  std::ostringstream os;
  os << std::setprecision(17) << v;
  return os.str();
}

// ---------------------------------------------------------------------------
// Parsing helpers

std::vector<std::string> split(const std::string &text, char sep) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream is(text);
  while (std::getline(is, item, sep))
    if (!item.empty())
      out.push_back(item);
  return out;
}

std::vector<Rational> parse_rational_list(const std::string &text) {
  std::vector<Rational> out;
  for (const auto &item : split(text, ','))
    out.push_back(parse_rational(item));
  if (out.empty())
    throw std::invalid_argument("empty q list");
  for (const auto &q : out)
    if (!(q > 0 && q < 1))
      throw std::invalid_argument("q values must lie in (0,1)");
  return out;
}

template <typename T> std::vector<T> parse_number_list(const std::string &text) {
  std::vector<T> out;
  for (const auto &item : split(text, ',')) {
    std::size_t used = 0;
    if constexpr (std::is_integral_v<T>)
      out.push_back(static_cast<T>(std::stoll(item, &used)));
    else
      out.push_back(static_cast<T>(std::stod(item, &used)));
    if (used != item.size())
      throw std::invalid_argument("cannot parse number '" + item + "'");
  }
  return out;
}

std::vector<JacobiParam> parse_a_list(const std::string &text, std::size_t n) {
  std::vector<JacobiParam> out;
  for (const auto &item : split(text, ',')) {
    if (item == "+" || item == "1/2" || item == "+1/2" || item == "0.5")
      out.push_back(JacobiParam::plus_half);
    else if (item == "-" || item == "-1/2" || item == "-0.5")
      out.push_back(JacobiParam::minus_half);
    else
      throw std::invalid_argument("Jacobi parameter must be + or -, got '" + item + "'");
  }
  if (out.empty())
    out.assign(n, JacobiParam::plus_half);
  if (out.size() != n)
    throw std::invalid_argument("need one Jacobi parameter per point");
  return out;
}

ContourSpec contour_spec(const Settings &s) {
  ContourSpec c;
  c.radius = s.get<double>("radius");
  c.x_nodes = s.get<int>("x_nodes");
  c.u_nodes = s.get<int>("u_nodes");
  c.tolerance = s.get<double>("tolerance");
  c.route = s.get<std::string>("route") == "contour" ? KernelRoute::contour : KernelRoute::residue;
  return c;
}

QuadratureSpec quad_spec(const Settings &s) {
  QuadratureSpec q;
  q.nodes = s.get<int>("quad_nodes");
  q.tolerance = s.get<double>("quad_tolerance");
  return q;
}

RunConfig run_config(const Settings &s) {
  RunConfig c;
  c.q = s.get<double>("q");
  c.depth = s.get<int>("K");
  c.steps = s.get<std::int64_t>("steps");
  c.replicas = s.get<std::int64_t>("replicas");
  c.seed = s.get<std::uint64_t>("seed");
  c.odd_wall_uses_half_time = s.get<std::string>("wall") == "half";
  c.validate();
  return c;
}

// ---------------------------------------------------------------------------
// Subcommands

int cmd_simulate(const Settings &s) {
  const RunConfig cfg = run_config(s);
  const auto record = s.get<std::string>("record");
  const RecordMode mode = record == "half"      ? RecordMode::half_times
                          : record == "integer" ? RecordMode::integer_times
                                                : RecordMode::final_only;
  std::optional<InjectedDraws> injected;
  if (const auto path = s.get<std::string>("draws"); !path.empty()) {
    std::ifstream in(path);
    if (!in)
      throw std::invalid_argument("cannot open draw table " + path);
    json table;
    in >> table;
    injected = InjectedDraws::from_json(table);
  }
  AtomicOutput out(s.get<std::string>("out"));
  auto &os = out.stream();
  json header = meta(s, "simulate");
  header["params"] = s.run_params();
  os << json{{"header", header}}.dump() << '\n';
  for (std::int64_t rep = 0; rep < cfg.replicas; ++rep) {
    auto sink = [&](const ParticleArray &a, std::int64_t t) {
      json line = to_json(a.to_state(t));
      line["replica"] = rep;
      os << line.dump() << '\n';
    };
    if (injected)
      run_replica(cfg, *injected, mode, sink);
    else
      run_replica(cfg, RandomDraws(cfg.q, cfg.seed, static_cast<std::uint64_t>(rep)), mode, sink);
  }
  out.commit();
  return ok;
}

int finish_report(const Settings &s, json report, bool pass) {
  report["pass"] = pass;
  report["meta"] = meta(s, "verify");
  AtomicOutput out(s.get<std::string>("out"));
  out.stream() << report.dump(2) << '\n';
  out.commit();
  return pass ? ok : verification;
}

int cmd_verify(const Settings &s, const std::string &check) {
  const double tol = s.get<double>("residual_tolerance");
  auto or_default = [&](const char *name, int fallback) {
    const int v = s.get<int>(name);
    return v > 0 ? v : fallback;
  };
  if (check == "keyidentity") {
    const auto qs = parse_rational_list(s.get<std::string>("q_list"));
    const int bound = s.get<int>("bound");
    const int id = s.get<int>("id");
    json per = json::array();
    Rational worst(0);
    long long cases = 0;
    for (int i = (id == 0 ? 1 : id); i <= (id == 0 ? 4 : id); ++i) {
      Rational w(0);
      long long c = 0;
      for (const auto &q : qs) {
        auto [r, n] = keyidentity_grid(i, bound, q);
        if (r > w)
          w = r;
        c += n;
      }
      per.push_back({{"id", i}, {"residual", w.str()}, {"cases", c}});
      if (w > worst)
        worst = w;
      cases += c;
    }
    json rep = {{"check", "keyidentity"},
                {"params", {{"bound", bound}, {"q_list", s.get<std::string>("q_list")}, {"id", id}}},
                {"residual", to_double(worst)},
                {"residual_exact", worst.str()},
                {"cases", cases},
                {"identities", per},
                {"conclusive_rows", nullptr},
                {"tail_bound", 0.0}};
    return finish_report(s, rep, worst == 0);
  }
  if (check == "intertwining") {
    const Rational q = parse_rational(s.get<std::string>("q_exact"));
    const bool all_entries = s.get<bool>("all_entries");
    auto r = intertwining_check(s.get<int>("k"), s.get<int>("M"), q, s.get<double>("tail_tolerance"), !all_entries);
    json rep = r.to_json();
    rep["graded_on"] = r.conclusive_rows > 0 ? "conclusive_rows" : "all_entries";
    const Rational graded = r.conclusive_rows > 0 ? r.max_residual_conclusive : r.max_residual;
    return finish_report(s, rep, to_double(graded) <= tol);
  }
  if (check == "branching") {
    const int k_max = or_default("k_max", 6), cap = or_default("cap", 6);
    auto r = branching_grid(k_max, cap);
    json rep = {{"check", "branching"},
                {"params", {{"k_max", k_max}, {"cap", cap}}},
                {"residual", to_double(r.max_residual)},
                {"residual_exact", r.max_residual.str()},
                {"cases", r.cases},
                {"conclusive_rows", nullptr},
                {"tail_bound", 0.0}};
    return finish_report(s, rep, r.max_residual == 0);
  }
  if (check == "sp") {
    const int k_max = or_default("k_max", 4), cap = or_default("cap", 4);
    const Rational q = parse_rational(s.get<std::string>("q_exact"));
    auto r = sp_grid(k_max, cap, q);
    json rep = {{"check", "sp"},
                {"params", {{"k_max", k_max}, {"cap", cap}, {"q", q.str()}}},
                {"residual", to_double(r.max_residual)},
                {"residual_exact", r.max_residual.str()},
                {"cases", r.cases},
                {"conclusive_rows", nullptr},
                {"tail_bound", 0.0}};
    return finish_report(s, rep, r.max_residual == 0);
  }
  if (check == "psame") {
    const int k_max = or_default("k_max", 5), cap = or_default("cap", 6);
    const auto qs = parse_rational_list(s.get<std::string>("q_list"));
    std::optional<AtomicOutput> dump;
    if (const auto path = s.get<std::string>("dump"); !path.empty()) {
      dump.emplace(path);
      dump->stream() << csv_header_comment(s, "verify psame") << "k,lambda,beta,P,T_closed,T_quad,abs_diff\n";
    }
    auto sink = [&](const PsameRow &row) {
      if (dump)
        dump->stream() << row.k << ',' << row.lambda.to_string() << ',' << row.beta.to_string() << ','
                       << fmt(row.p) << ',' << fmt(row.t_closed) << ',' << fmt(row.t_quad) << ','
                       << fmt(std::abs(row.t_closed - row.t_quad)) << '\n';
    };
    auto r = psame_grid(k_max, cap, qs, quad_spec(s), sink);
    if (dump)
      dump->commit();
    json rep = {{"check", "psame"},
                {"params", {{"k_max", k_max}, {"cap", cap}, {"q_list", s.get<std::string>("q_list")}}},
                {"residual", to_double(r.max_exact_diff)},
                {"residual_exact", r.max_exact_diff.str()},
                {"quadrature_residual", r.max_quad_diff},
                {"cases", r.cases},
                {"conclusive_rows", nullptr},
                {"tail_bound", 0.0}};
    return finish_report(s, rep, r.max_exact_diff == 0 && r.max_quad_diff <= 1e-8);
  }
  throw std::invalid_argument("unknown check '" + check + "'");
}

int cmd_kernel(const Settings &s) {
  const auto points = parse_points(s.get<std::string>("points"));
  if (points.empty())
    throw std::invalid_argument("no points given");
  const auto spec = contour_spec(s);
  const double q = s.get<double>("q");
  const auto T = s.get<std::int64_t>("T");
  AtomicOutput out(s.get<std::string>("out"));
  auto &os = out.stream();
  os << csv_header_comment(s, "kernel") << "p1,p2,re,im,err_est\n";
  for (const auto &p1 : points)
    for (const auto &p2 : points) {
      auto v = correlation_kernel(T, p1, p2, q, spec);
      os << '"' << p1.to_string() << "\",\"" << p2.to_string() << "\"," << fmt(v.value.real()) << ','
         << fmt(v.value.imag()) << ',' << fmt(v.error) << '\n';
    }
  out.commit();
  return ok;
}

int cmd_compare(const Settings &s) {
  const auto points = parse_points(s.get<std::string>("points"));
  if (points.empty())
    throw std::invalid_argument("no points given");
  RunConfig cfg = run_config(s);
  const auto T = s.get<std::int64_t>("T");
  const double det = correlation_det(T, points, cfg.q, contour_spec(s));
  const auto est = empirical_correlation(cfg, T, {points}).front();
  const double sigma = std::sqrt(std::max(det * (1.0 - det), 0.0) / static_cast<double>(cfg.replicas));
  json pts = json::array();
  for (const auto &p : points)
    pts.push_back({p.s, p.k});
  json rep = {{"points", pts},
              {"T", T},
              {"det_KT", det},
              {"empirical", est.mean},
              {"sigma", sigma},
              {"z_score", sigma > 0 ? (est.mean - det) / sigma : 0.0},
              {"replicas", cfg.replicas},
              {"meta", meta(s, "compare")}};
  AtomicOutput out(s.get<std::string>("out"));
  out.stream() << rep.dump(2) << '\n';
  out.commit();
  return ok;
}

int cmd_asymptotics(const Settings &s, const std::string &regime) {
  const auto Ns = parse_number_list<std::int64_t>(s.get<std::string>("N"));
  for (std::size_t i = 0; i < Ns.size(); ++i)
    if (Ns[i] < 1 || (i > 0 && Ns[i] <= Ns[i - 1]))
      throw std::invalid_argument("N list must be positive and increasing");
  const double q = s.get<double>("q");
  std::vector<DiagnosticRow> rows;
  if (regime == "pearcey") {
    std::vector<PearceyPoint> pts;
    for (const auto &item : split(s.get<std::string>("limit_points"), ';')) {
      auto v = parse_number_list<double>(item);
      if (v.size() != 2)
        throw std::invalid_argument("limit point must be nu,eta");
      if (v[0] < 0)
        throw std::invalid_argument("nu must be >= 0");
      pts.push_back({v[0], v[1]});
    }
    rows = convergence_diagnostic_pearcey(pts, parse_a_list(s.get<std::string>("a"), pts.size()), q, Ns,
                                          contour_spec(s));
  } else if (regime == "jacobi") {
    const auto sl = parse_number_list<int>(s.get<std::string>("s"));
    const auto ro = parse_number_list<int>(s.get<std::string>("r_offsets"));
    rows = convergence_diagnostic_jacobi(sl, ro, parse_a_list(s.get<std::string>("a"), sl.size()),
                                         s.get<double>("t"), s.get<double>("l"), q, Ns, contour_spec(s),
                                         quad_spec(s));
  } else {
    throw std::invalid_argument("regime must be pearcey or jacobi");
  }
  AtomicOutput out(s.get<std::string>("out"));
  auto &os = out.stream();
  os << csv_header_comment(s, "asymptotics " + regime) << "N,det_finite,det_limit,abs_err\n";
  for (const auto &r : rows)
    os << r.N << ',' << fmt(r.det_finite) << ',' << fmt(r.det_limit) << ',' << fmt(r.abs_err) << '\n';
  out.commit();
  return ok;
}

} // namespace

int main(int argc, char **argv) {
  CLI::App app{"Interlacing particles with a partially reflecting wall"};
  app.require_subcommand(1);
  std::string config_path;
  app.add_option("--config", config_path, "JSON config file (unknown keys are errors)");
  std::map<std::string, std::string> flag_text;
  std::vector<std::pair<std::string, CLI::Option *>> flag_opts;
  std::map<std::string, std::string> raw;
  for (const auto &k : keys()) {
    auto *opt = app.add_option("--" + std::string(k.name), raw[k.name], k.help);
    flag_opts.emplace_back(k.name, opt);
  }
  app.fallthrough();

  auto *simulate = app.add_subcommand("simulate", "run the dynamics and write JSONL trajectories");
  auto *verify = app.add_subcommand("verify", "exact identity checks with a JSON report");
  std::string check;
  verify->add_option("check", check, "keyidentity | intertwining | branching | psame | sp")->required();
  bool all_flag = false;
  verify->add_flag("--all", all_flag, "keyidentity: every identity (the default)");
  auto *kernel = app.add_subcommand("kernel", "correlation kernel values as CSV");
  auto *compare = app.add_subcommand("compare", "det of the kernel against Monte Carlo");
  auto *asymptotics = app.add_subcommand("asymptotics", "finite-N against limit kernels as CSV");
  std::string regime;
  asymptotics->add_option("regime", regime, "pearcey | jacobi")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError &e) {
    return app.exit(e) == 0 ? ok : invalid;
  }

  try {
    for (const auto &[name, opt] : flag_opts)
      if (opt->count() > 0)
        flag_text[name] = raw[name];
    if (all_flag)
      flag_text["id"] = "0";
    Settings s = load_settings(config_path, flag_text);
    validate(s);
    if (const int threads = s.get<int>("threads"); threads > 0)
      ::setenv("WALLSIM_THREADS", std::to_string(threads).c_str(), 1);
    if (*simulate)
      return cmd_simulate(s);
    if (*verify)
      return cmd_verify(s, check);
    if (*kernel)
      return cmd_kernel(s);
    if (*compare)
      return cmd_compare(s);
    if (*asymptotics)
      return cmd_asymptotics(s, regime);
  } catch (const InconclusiveResult &e) {
    std::cerr << "inconclusive: " << e.what() << '\n';
    return inconclusive;
  } catch (const NumericalFailure &e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return numerical;
  } catch (const std::invalid_argument &e) {
    std::cerr << "error: " << e.what() << '\n';
    return invalid;
  } catch (const json::exception &e) {
    std::cerr << "error: " << e.what() << '\n';
    return invalid;
  } catch (const std::exception &e) {
    std::cerr << "error: " << e.what() << '\n';
    return numerical;
  }
  return invalid;
}
