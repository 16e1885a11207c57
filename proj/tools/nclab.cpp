// nclab command line. One subcommand per module; results land as JSON/CSV
// files in the output directory plus a run.json manifest that echoes the
// fully resolved configuration. Identical resolved configurations produce
// byte-identical outputs, independent of --workers.

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <complex>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <memory>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "nclab/bell.hpp"
#include "nclab/errors.hpp"
#include "nclab/fock.hpp"
#include "nclab/kernels.hpp"
#include "nclab/quenching.hpp"
#include "nclab/random_matrix.hpp"
#include "nclab/report.hpp"
#include "nclab/stochastic_limit.hpp"
#include "nclab/version.hpp"
#include "nclab/wick.hpp"

namespace {

namespace nl = nclab;
using nclab::report::Csv;
using nclab::report::Json;

std::string fmt(double v) { return nl::report::format_double(v, nl::report::json_digits); }

// ---------------------------------------------------------------- parsing

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == sep) {
      out.push_back(cur);
      cur.clear();
    } else if (c != ' ' && c != '\t') {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

double parse_double_token(const std::string& tok, const std::string& what) {
  if (tok.empty()) throw nl::InvalidInputError(what + ": empty number");
  char* end = nullptr;
  const double v = std::strtod(tok.c_str(), &end);
  if (end != tok.c_str() + tok.size())
    throw nl::InvalidInputError(what + ": bad number '" + tok + "'");
  return v;
}

int parse_int_token(const std::string& tok, const std::string& what) {
  if (tok.empty()) throw nl::InvalidInputError(what + ": empty integer");
  char* end = nullptr;
  const long v = std::strtol(tok.c_str(), &end, 10);
  if (end != tok.c_str() + tok.size())
    throw nl::InvalidInputError(what + ": bad integer '" + tok + "'");
  if (v < -1000000000L || v > 1000000000L)
    throw nl::InvalidInputError(what + ": integer out of range '" + tok + "'");
  return static_cast<int>(v);
}

std::vector<double> parse_double_list(const std::string& s, const std::string& what) {
  std::vector<double> out;
  for (const std::string& tok : split(s, ','))
    out.push_back(parse_double_token(tok, what));
  return out;
}

std::vector<int> parse_int_list(const std::string& s, const std::string& what) {
  std::vector<int> out;
  for (const std::string& tok : split(s, ','))
    out.push_back(parse_int_token(tok, what));
  return out;
}

// "1,0;0,1" -> [[1,0],[0,1]]
std::vector<std::vector<double>> parse_vector_list(const std::string& s,
                                                   const std::string& what) {
  std::vector<std::vector<double>> out;
  for (const std::string& group : split(s, ';'))
    out.push_back(parse_double_list(group, what));
  return out;
}

// Tokens: Q<i> (coordinate A_i + A_i^dagger), A<i> (annihilator),
// Ad<i> (creator), comma separated.
std::vector<nl::wick::OperatorExpr> parse_pattern(const std::string& pattern) {
  if (pattern.empty()) throw nl::InvalidInputError("pattern is empty");
  std::vector<nl::wick::OperatorExpr> factors;
  for (const std::string& tok : split(pattern, ',')) {
    std::string head;
    std::size_t digits = 0;
    if (tok.rfind("Ad", 0) == 0) {
      head = "Ad";
      digits = 2;
    } else if (!tok.empty() && (tok[0] == 'Q' || tok[0] == 'A')) {
      head = tok.substr(0, 1);
      digits = 1;
    } else {
      throw nl::InvalidInputError("unrecognized pattern token '" + tok + "'");
    }
    const int mode = parse_int_token(tok.substr(digits), "pattern token '" + tok + "'");
    if (head == "Q")
      factors.push_back(nl::wick::OperatorExpr::coordinate(mode));
    else if (head == "A")
      factors.push_back(nl::wick::OperatorExpr::generator(nl::wick::annihilator(mode)));
    else
      factors.push_back(nl::wick::OperatorExpr::generator(nl::wick::creator(mode)));
  }
  return factors;
}

nl::wick::Statistics parse_statistics(const std::string& s) {
  if (s == "boltzmann") return nl::wick::Statistics::Boltzmann;
  if (s == "bose") return nl::wick::Statistics::Bose;
  throw nl::InvalidInputError("unknown statistics '" + s + "' (boltzmann|bose)");
}

nl::bell::Transform parse_transform(const std::string& s) {
  if (s == "sign") return nl::bell::Transform::Sign;
  if (s == "clamp") return nl::bell::Transform::Clamp;
  throw nl::InvalidInputError("unknown transform '" + s + "' (sign|clamp)");
}

nl::bell::BackendKind parse_backend(const std::string& s) {
  if (s == "fock") return nl::bell::BackendKind::Fock;
  if (s == "classical") return nl::bell::BackendKind::Classical;
  throw nl::InvalidInputError("unknown backend '" + s + "' (fock|classical)");
}

nl::quenching::PartitionMethod parse_method(const std::string& s) {
  if (s == "mc") return nl::quenching::PartitionMethod::MonteCarlo;
  if (s == "quadrature") return nl::quenching::PartitionMethod::Quadrature;
  throw nl::InvalidInputError("unknown method '" + s + "' (mc|quadrature)");
}

std::string join_ints(const std::vector<int>& v, char sep) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += sep;
    out += std::to_string(v[i]);
  }
  return out;
}

// ------------------------------------------------------------ config file

// JSON config with flat keys mirroring the long flag names. Flags given on
// the command line win; list-valued keys accept either the flag's string
// form or a native JSON array.
class ConfigFile {
 public:
  void load(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw nl::ConfigError("cannot read config file: " + path);
    try {
      doc_ = nlohmann::json::parse(f);
    } catch (const nlohmann::json::exception& e) {
      throw nl::ConfigError("config file " + path + ": " + e.what());
    }
    if (!doc_.is_object()) throw nl::ConfigError("config file must hold a JSON object");
    loaded_ = true;
  }

  void fill_string(const CLI::Option* opt, const std::string& key, std::string& v) {
    const nlohmann::json* j = lookup(opt, key);
    if (!j) return;
    if (!j->is_string()) throw nl::ConfigError("config key '" + key + "' must be a string");
    v = j->get<std::string>();
  }

  void fill_int(const CLI::Option* opt, const std::string& key, int& v) {
    const nlohmann::json* j = lookup(opt, key);
    if (!j) return;
    if (!j->is_number_integer())
      throw nl::ConfigError("config key '" + key + "' must be an integer");
    const auto raw = j->get<std::int64_t>();
    if (raw < -1000000000 || raw > 1000000000)
      throw nl::ConfigError("config key '" + key + "' out of range");
    v = static_cast<int>(raw);
  }

  void fill_u64(const CLI::Option* opt, const std::string& key, std::uint64_t& v) {
    const nlohmann::json* j = lookup(opt, key);
    if (!j) return;
    if (!j->is_number_integer() && !j->is_number_unsigned())
      throw nl::ConfigError("config key '" + key + "' must be an integer");
    if (j->is_number_integer() && j->get<std::int64_t>() < 0)
      throw nl::ConfigError("config key '" + key + "' must be nonnegative");
    v = j->get<std::uint64_t>();
  }

  void fill_double(const CLI::Option* opt, const std::string& key, double& v) {
    const nlohmann::json* j = lookup(opt, key);
    if (!j) return;
    if (!j->is_number()) throw nl::ConfigError("config key '" + key + "' must be a number");
    v = j->get<double>();
  }

  void fill_bool(const CLI::Option* opt, const std::string& key, bool& v) {
    const nlohmann::json* j = lookup(opt, key);
    if (!j) return;
    if (!j->is_boolean()) throw nl::ConfigError("config key '" + key + "' must be a boolean");
    v = j->get<bool>();
  }

  // string form or JSON array of numbers
  void fill_list(const CLI::Option* opt, const std::string& key, std::string& v) {
    const nlohmann::json* j = lookup(opt, key);
    if (!j) return;
    if (j->is_string()) {
      v = j->get<std::string>();
      return;
    }
    if (!j->is_array())
      throw nl::ConfigError("config key '" + key + "' must be a string or array");
    v = number_list(*j, key);
  }

  // string form or JSON array of arrays of numbers
  void fill_nested_list(const CLI::Option* opt, const std::string& key, std::string& v) {
    const nlohmann::json* j = lookup(opt, key);
    if (!j) return;
    if (j->is_string()) {
      v = j->get<std::string>();
      return;
    }
    if (!j->is_array())
      throw nl::ConfigError("config key '" + key + "' must be a string or array");
    std::string out;
    for (std::size_t i = 0; i < j->size(); ++i) {
      if (i) out += ';';
      const nlohmann::json& inner = (*j)[i];
      if (!inner.is_array())
        throw nl::ConfigError("config key '" + key + "' must hold arrays of numbers");
      out += number_list(inner, key);
    }
    v = out;
  }

  // every config key must correspond to an option of the active subcommand
  void ensure_all_consumed(const std::string& subcommand) const {
    if (!loaded_) return;
    for (auto it = doc_.begin(); it != doc_.end(); ++it) {
      if (!legal_.count(it.key()))
        throw nl::ConfigError("config key '" + it.key() +
                              "' is not an option of subcommand '" + subcommand + "'");
    }
  }

 private:
  const nlohmann::json* lookup(const CLI::Option* opt, const std::string& key) {
    legal_.insert(key);
    if (!loaded_) return nullptr;
    const auto it = doc_.find(key);
    if (it == doc_.end()) return nullptr;
    if (opt != nullptr && opt->count() > 0) return nullptr;  // flag wins
    return &*it;
  }

  static std::string number_list(const nlohmann::json& arr, const std::string& key) {
    std::string out;
    for (std::size_t i = 0; i < arr.size(); ++i) {
      if (i) out += ',';
      if (!arr[i].is_number())
        throw nl::ConfigError("config key '" + key + "' must hold numbers");
      out += nl::report::format_double(arr[i].get<double>(), nl::report::json_digits);
    }
    return out;
  }

  nlohmann::json doc_ = nlohmann::json::object();
  bool loaded_ = false;
  std::set<std::string> legal_;
};

// ----------------------------------------------------------- run context

struct RunContext {
  std::string subcommand;
  std::string out_dir;
  std::uint64_t seed = 1;
  int workers = 1;
  Json options = Json::object();
  std::vector<std::pair<std::string, std::string>> files;  // name -> bytes

  void emit(const std::string& name, std::string content) {
    files.emplace_back(name, std::move(content));
  }
};

void write_outputs(const RunContext& ctx) {
  namespace fs = std::filesystem;
  const fs::path dir(ctx.out_dir);
  for (const auto& [name, content] : ctx.files)
    nl::report::write_file((dir / name).string(), content);

  Json manifest = Json::object();
  manifest.set("artifact", nl::artifact_name);
  manifest.set("version", nl::artifact_version);
  manifest.set("subcommand", ctx.subcommand);
  manifest.set("seed", ctx.seed);
  manifest.set("kernel", nl::kernels::backend_name(nl::kernels::active_backend()));
  manifest.set("out", ctx.out_dir);
  Json opts = ctx.options;
  manifest.set("options", std::move(opts));
  Json outputs = Json::array();
  for (const auto& [name, content] : ctx.files) outputs.push(name);
  manifest.set("outputs", std::move(outputs));
  nl::report::write_file((dir / "run.json").string(), manifest.dump());
}

// ------------------------------------------------------------ subcommands

struct MomentsCmd {
  std::string pattern;
  std::string statistics = "boltzmann";
  int modes = 0;  // 0: inferred from the pattern
  std::string weight_diagonal;

  CLI::App* cmd = nullptr;
  CLI::Option *o_pattern = nullptr, *o_statistics = nullptr, *o_modes = nullptr,
              *o_weight = nullptr;

  void setup(CLI::App& app) {
    cmd = app.add_subcommand("moments", "Vacuum moment of an operator pattern");
    cmd->fallthrough();
    o_pattern = cmd->add_option("--pattern", pattern,
                                "Comma-separated tokens Q<i>, A<i>, Ad<i>");
    o_statistics = cmd->add_option("--statistics", statistics, "boltzmann|bose")
                       ->capture_default_str();
    o_modes = cmd->add_option("--modes", modes,
                              "Mode count of the pairing table (0: inferred)")
                  ->capture_default_str();
    o_weight = cmd->add_option("--weight-diagonal", weight_diagonal,
                               "Diagonal pairing weights, comma separated");
  }

  void fill(ConfigFile& cfg) {
    cfg.fill_string(o_pattern, "pattern", pattern);
    cfg.fill_string(o_statistics, "statistics", statistics);
    cfg.fill_int(o_modes, "modes", modes);
    cfg.fill_list(o_weight, "weight-diagonal", weight_diagonal);
  }

  void run(RunContext& ctx) {
    if (pattern.empty()) throw nl::InvalidInputError("missing --pattern");
    const auto factors = parse_pattern(pattern);
    const auto stats = parse_statistics(statistics);
    if (modes < 0) throw nl::InvalidInputError("--modes must be nonnegative");

    int max_mode = -1;
    for (const auto& f : factors) max_mode = std::max(max_mode, f.max_mode());

    nl::wick::ContractionRule rule;
    if (!weight_diagonal.empty()) {
      const auto d = parse_double_list(weight_diagonal, "--weight-diagonal");
      if (modes > 0 && modes != static_cast<int>(d.size()))
        throw nl::InvalidInputError("--modes disagrees with the diagonal weight length");
      rule = nl::wick::ContractionRule::diagonal(stats, d);
    } else {
      const int m = modes > 0 ? modes : std::max(max_mode + 1, 1);
      rule = nl::wick::ContractionRule::kronecker(stats, m);
    }

    const double value = nl::wick::expr_moment(factors, rule);
    std::cout << fmt(value) << "\n";

    ctx.options.set("pattern", pattern);
    ctx.options.set("statistics", statistics);
    ctx.options.set("modes", rule.modes());
    ctx.options.set("weight-diagonal", weight_diagonal);

    Json out = Json::object();
    out.set("pattern", pattern);
    out.set("statistics", statistics);
    out.set("modes", rule.modes());
    out.set("value", value);
    ctx.emit("moments.json", out.dump());
  }
};

struct FockCmd {
  std::string pattern;
  std::string basis_kind = "free";
  int level = 3;
  int modes = 0;
  bool dump_matrix = false;

  CLI::App* cmd = nullptr;
  CLI::Option *o_pattern = nullptr, *o_basis = nullptr, *o_level = nullptr,
              *o_modes = nullptr, *o_dump = nullptr;

  void setup(CLI::App& app) {
    cmd = app.add_subcommand("fock", "Finite-section matrix check of a pattern");
    cmd->fallthrough();
    o_pattern = cmd->add_option("--pattern", pattern,
                                "Comma-separated tokens Q<i>, A<i>, Ad<i>");
    o_basis = cmd->add_option("--basis", basis_kind, "free|bose")->capture_default_str();
    o_level = cmd->add_option("--level", level, "Truncation depth")->capture_default_str();
    o_modes = cmd->add_option("--modes", modes, "Mode count (0: inferred)")
                  ->capture_default_str();
    o_dump = cmd->add_flag("--dump-matrix", dump_matrix,
                           "Also write the product matrix as CSV");
  }

  void fill(ConfigFile& cfg) {
    cfg.fill_string(o_pattern, "pattern", pattern);
    cfg.fill_string(o_basis, "basis", basis_kind);
    cfg.fill_int(o_level, "level", level);
    cfg.fill_int(o_modes, "modes", modes);
    cfg.fill_bool(o_dump, "dump-matrix", dump_matrix);
  }

  void run(RunContext& ctx) {
    if (pattern.empty()) throw nl::InvalidInputError("missing --pattern");
    const auto factors = parse_pattern(pattern);
    if (level < 1) throw nl::InvalidInputError("--level must be at least 1");
    if (modes < 0) throw nl::InvalidInputError("--modes must be nonnegative");

    int max_mode = -1;
    for (const auto& f : factors) max_mode = std::max(max_mode, f.max_mode());
    const int m = modes > 0 ? modes : std::max(max_mode + 1, 1);

    std::shared_ptr<const nl::fock::FockBasis> basis;
    nl::wick::Statistics stats;
    if (basis_kind == "free") {
      basis = std::make_shared<const nl::fock::FreeFockBasis>(m, level);
      stats = nl::wick::Statistics::Boltzmann;
    } else if (basis_kind == "bose") {
      basis = std::make_shared<const nl::fock::BoseFockBasis>(m, level);
      stats = nl::wick::Statistics::Bose;
    } else {
      throw nl::InvalidInputError("unknown basis '" + basis_kind + "' (free|bose)");
    }

    nl::fock::OperatorMatrix prod = nl::fock::expr_matrix(factors[0], basis);
    for (std::size_t i = 1; i < factors.size(); ++i)
      prod.mat = nl::linalg::matmul(prod.mat, nl::fock::expr_matrix(factors[i], basis).mat);
    const double vac = nl::fock::vacuum_expectation(prod);

    int total_degree = 0;
    for (const auto& f : factors) total_degree += f.degree();
    const bool check_valid = total_degree <= 2 * level;
    nl::fock::CrosscheckReport check;
    if (check_valid)
      check = nl::fock::crosscheck(factors, nl::wick::ContractionRule::kronecker(stats, m),
                                   basis);

    std::cout << "vacuum expectation = " << fmt(vac) << "\n";
    if (check_valid)
      std::cout << "crosscheck max deviation = " << fmt(check.max_deviation)
                << (check.ok ? " (ok)" : " (MISMATCH)") << "\n";

    ctx.options.set("pattern", pattern);
    ctx.options.set("basis", basis_kind);
    ctx.options.set("level", level);
    ctx.options.set("modes", m);
    ctx.options.set("dump-matrix", dump_matrix);

    Json out = Json::object();
    out.set("pattern", pattern);
    out.set("basis", basis_kind);
    out.set("modes", m);
    out.set("level", level);
    out.set("dimension", static_cast<std::int64_t>(basis->dimension()));
    out.set("vacuum_expectation", vac);
    if (check_valid) {
      Json c = Json::object();
      c.set("max_deviation", check.max_deviation);
      c.set("ok", check.ok);
      out.set("crosscheck", std::move(c));
    } else {
      out.set("crosscheck", Json());
    }
    ctx.emit("fock.json", out.dump());

    if (dump_matrix) {
      const std::size_t d = basis->dimension();
      if (d > 1024)
        throw nl::CapacityError("matrix dump capped at 1024 basis states");
      std::vector<std::string> header{"state"};
      for (std::size_t j = 0; j < d; ++j) header.push_back(basis->label(j));
      Csv csv(std::move(header));
      for (std::size_t i = 0; i < d; ++i) {
        std::vector<std::string> row{basis->label(i)};
        for (std::size_t j = 0; j < d; ++j) row.push_back(Csv::cell(prod.mat(i, j)));
        csv.add_row(std::move(row));
      }
      ctx.emit("fock_matrix.csv", csv.dump());
    }
  }
};

struct LimitCmd {
  std::string lambdas = "0.5,0.35,0.25,0.18";
  double omega0 = 0.0;
  double f_center = 0.0, f_width = 1.0;
  double g_center = 0.0, g_width = 1.0;
  double rho_center = 0.0, rho_width = 1.0;
  double t_step = 0.02, t_half_width = 8.0;
  double omega_step = 0.004, omega_half_width = 8.0;

  CLI::App* cmd = nullptr;
  CLI::Option *o_lambdas = nullptr, *o_omega0 = nullptr, *o_fc = nullptr, *o_fw = nullptr,
              *o_gc = nullptr, *o_gw = nullptr, *o_rc = nullptr, *o_rw = nullptr,
              *o_ts = nullptr, *o_th = nullptr, *o_os = nullptr, *o_oh = nullptr;

  void setup(CLI::App& app) {
    cmd = app.add_subcommand("limit", "Rescaled pairing convergence table");
    cmd->fallthrough();
    o_lambdas = cmd->add_option("--lambdas", lambdas,
                                "Strictly decreasing scale parameters")
                    ->capture_default_str();
    o_omega0 = cmd->add_option("--omega0", omega0, "Resonance frequency")
                   ->capture_default_str();
    o_fc = cmd->add_option("--f-center", f_center, "First test function center")
               ->capture_default_str();
    o_fw = cmd->add_option("--f-width", f_width, "First test function width")
               ->capture_default_str();
    o_gc = cmd->add_option("--g-center", g_center, "Second test function center")
               ->capture_default_str();
    o_gw = cmd->add_option("--g-width", g_width, "Second test function width")
               ->capture_default_str();
    o_rc = cmd->add_option("--rho-center", rho_center, "Spectral density center")
               ->capture_default_str();
    o_rw = cmd->add_option("--rho-width", rho_width, "Spectral density width")
               ->capture_default_str();
    o_ts = cmd->add_option("--t-step", t_step, "Time grid step")->capture_default_str();
    o_th = cmd->add_option("--t-half-width", t_half_width, "Time half range")
               ->capture_default_str();
    o_os = cmd->add_option("--omega-step", omega_step, "Frequency grid step")
               ->capture_default_str();
    o_oh = cmd->add_option("--omega-half-width", omega_half_width, "Frequency half range")
               ->capture_default_str();
  }

  void fill(ConfigFile& cfg) {
    cfg.fill_list(o_lambdas, "lambdas", lambdas);
    cfg.fill_double(o_omega0, "omega0", omega0);
    cfg.fill_double(o_fc, "f-center", f_center);
    cfg.fill_double(o_fw, "f-width", f_width);
    cfg.fill_double(o_gc, "g-center", g_center);
    cfg.fill_double(o_gw, "g-width", g_width);
    cfg.fill_double(o_rc, "rho-center", rho_center);
    cfg.fill_double(o_rw, "rho-width", rho_width);
    cfg.fill_double(o_ts, "t-step", t_step);
    cfg.fill_double(o_th, "t-half-width", t_half_width);
    cfg.fill_double(o_os, "omega-step", omega_step);
    cfg.fill_double(o_oh, "omega-half-width", omega_half_width);
  }

  void run(RunContext& ctx) {
    namespace sl = nl::stochastic_limit;
    sl::RescalingConfig rc;
    rc.lambdas = parse_double_list(lambdas, "--lambdas");
    rc.omega0 = omega0;
    rc.quadrature = sl::QuadratureSpec{t_step, t_half_width, omega_step, omega_half_width};
    const sl::TestFunction f{f_center, f_width, true};
    const sl::TestFunction g{g_center, g_width, true};
    const sl::SpectralDensity rho = sl::SpectralDensity::normal(rho_center, rho_width);

    const sl::ConvergenceTable table = sl::convergence_table(rc, f, g, rho);

    std::cout << "limit = " << fmt(table.limit.real()) << " + " << fmt(table.limit.imag())
              << "i, converged = " << (table.converged ? "true" : "false") << "\n";

    ctx.options.set("lambdas", lambdas);
    ctx.options.set("omega0", omega0);
    ctx.options.set("f-center", f_center);
    ctx.options.set("f-width", f_width);
    ctx.options.set("g-center", g_center);
    ctx.options.set("g-width", g_width);
    ctx.options.set("rho-center", rho_center);
    ctx.options.set("rho-width", rho_width);
    ctx.options.set("t-step", t_step);
    ctx.options.set("t-half-width", t_half_width);
    ctx.options.set("omega-step", omega_step);
    ctx.options.set("omega-half-width", omega_half_width);

    Csv csv({"lambda", "re_value", "im_value", "abs_error"});
    for (const auto& row : table.rows)
      csv.add_row({Csv::cell(row.lambda), Csv::cell(row.value.real()),
                   Csv::cell(row.value.imag()), Csv::cell(row.abs_error)});
    ctx.emit("limit.csv", csv.dump());

    Json out = Json::object();
    out.set("limit_re", table.limit.real());
    out.set("limit_im", table.limit.imag());
    out.set("converged", table.converged);
    ctx.emit("limit.json", out.dump());
  }
};

struct WignerCmd {
  int n = 64;
  int replicas = 2;
  int samples = 32;
  int max_degree = 4;
  std::string pattern;  // optional single color pattern

  CLI::App* cmd = nullptr;
  CLI::Option *o_n = nullptr, *o_replicas = nullptr, *o_samples = nullptr,
              *o_degree = nullptr, *o_pattern = nullptr;

  void setup(CLI::App& app) {
    cmd = app.add_subcommand("wigner", "Random-matrix trace moments vs free predictions");
    cmd->fallthrough();
    o_n = cmd->add_option("--n", n, "Matrix dimension")->capture_default_str();
    o_replicas = cmd->add_option("--replicas", replicas, "Independent matrices")
                     ->capture_default_str();
    o_samples = cmd->add_option("--samples", samples, "Monte Carlo samples")
                    ->capture_default_str();
    o_degree = cmd->add_option("--max-degree", max_degree, "Report degree bound")
                   ->capture_default_str();
    o_pattern = cmd->add_option("--pattern", pattern,
                                "Single color pattern, e.g. 0,1,0,1");
  }

  void fill(ConfigFile& cfg) {
    cfg.fill_int(o_n, "n", n);
    cfg.fill_int(o_replicas, "replicas", replicas);
    cfg.fill_int(o_samples, "samples", samples);
    cfg.fill_int(o_degree, "max-degree", max_degree);
    cfg.fill_list(o_pattern, "pattern", pattern);
  }

  void run(RunContext& ctx) {
    nl::random_matrix::EnsembleConfig ec;
    ec.n = n;
    ec.replicas = replicas;
    ec.samples = samples;
    ec.seed = ctx.seed;
    ec.workers = ctx.workers;

    ctx.options.set("n", n);
    ctx.options.set("replicas", replicas);
    ctx.options.set("samples", samples);
    ctx.options.set("max-degree", max_degree);
    ctx.options.set("pattern", pattern);

    if (!pattern.empty()) {
      const std::vector<int> pat = parse_int_list(pattern, "--pattern");
      const auto est = nl::random_matrix::trace_moment(ec, pat);
      const double pred = nl::random_matrix::free_prediction(pat, replicas);
      const double dev = est.value - pred;
      double z = 0.0;
      if (dev != 0.0)
        z = est.std_error > 0.0 ? dev / est.std_error
                                : std::numeric_limits<double>::infinity();
      std::cout << "estimate = " << fmt(est.value) << " (stderr " << fmt(est.std_error)
                << "), prediction = " << fmt(pred) << "\n";
      Json out = Json::object();
      out.set("pattern", join_ints(pat, '-'));
      out.set("estimate", est.value);
      out.set("std_error", est.std_error);
      out.set("prediction", pred);
      out.set("zscore", z);
      ctx.emit("wigner.json", out.dump());
      return;
    }

    const auto report = nl::random_matrix::freeness_report(ec, max_degree);
    std::cout << "patterns = " << report.rows.size()
              << ", max |z| = " << fmt(report.max_abs_zscore) << "\n";
    Csv csv({"pattern", "estimate", "stderr", "prediction", "zscore"});
    for (const auto& row : report.rows)
      csv.add_row({join_ints(row.pattern, '-'), Csv::cell(row.estimate.value),
                   Csv::cell(row.estimate.std_error), Csv::cell(row.prediction),
                   Csv::cell(row.zscore)});
    ctx.emit("wigner.csv", csv.dump());
  }
};

struct QuenchCmd {
  int uniform_p = 0;
  std::string specs;  // "c1,c2;c1,c2"
  std::string pattern = "0,0,0,0";
  std::string statistics = "boltzmann";
  std::string weight_diagonal;
  bool mc = false;
  int n = 64;
  int samples = 32;

  CLI::App* cmd = nullptr;
  CLI::Option *o_uniform = nullptr, *o_specs = nullptr, *o_pattern = nullptr,
              *o_statistics = nullptr, *o_weight = nullptr, *o_mc = nullptr,
              *o_n = nullptr, *o_samples = nullptr;

  void setup(CLI::App& app) {
    cmd = app.add_subcommand("quench", "Moments of quenched linear combinations");
    cmd->fallthrough();
    o_uniform = cmd->add_option("--uniform-p", uniform_p,
                                "Single uniform spec over p replicas");
    o_specs = cmd->add_option("--specs", specs,
                              "Coefficient vectors, ';' between specs");
    o_pattern = cmd->add_option("--pattern", pattern, "Spec indices, e.g. 0,1,0,1")
                    ->capture_default_str();
    o_statistics = cmd->add_option("--statistics", statistics, "boltzmann|bose")
                       ->capture_default_str();
    o_weight = cmd->add_option("--weight-diagonal", weight_diagonal,
                               "Diagonal pairing weights over replicas");
    o_mc = cmd->add_flag("--mc", mc, "Also estimate via the matrix model");
    o_n = cmd->add_option("--n", n, "Matrix dimension for --mc")->capture_default_str();
    o_samples = cmd->add_option("--samples", samples, "Samples for --mc")
                    ->capture_default_str();
    o_uniform->excludes(o_specs);
  }

  void fill(ConfigFile& cfg) {
    cfg.fill_int(o_uniform, "uniform-p", uniform_p);
    cfg.fill_nested_list(o_specs, "specs", specs);
    cfg.fill_list(o_pattern, "pattern", pattern);
    cfg.fill_string(o_statistics, "statistics", statistics);
    cfg.fill_list(o_weight, "weight-diagonal", weight_diagonal);
    cfg.fill_bool(o_mc, "mc", mc);
    cfg.fill_int(o_n, "n", n);
    cfg.fill_int(o_samples, "samples", samples);
  }

  void run(RunContext& ctx) {
    std::vector<nl::quenching::QuenchingSpec> spec_list;
    if (uniform_p > 0 && !specs.empty())
      throw nl::InvalidInputError("--uniform-p and --specs are mutually exclusive");
    if (uniform_p > 0) {
      spec_list.push_back(nl::quenching::QuenchingSpec::uniform(uniform_p));
    } else if (!specs.empty()) {
      for (auto& coeff : parse_vector_list(specs, "--specs")) {
        nl::quenching::QuenchingSpec s;
        s.replicas = static_cast<int>(coeff.size());
        s.coefficients = std::move(coeff);
        spec_list.push_back(std::move(s));
      }
    } else {
      throw nl::InvalidInputError("need --uniform-p or --specs");
    }

    const std::vector<int> pat = parse_int_list(pattern, "--pattern");
    for (int idx : pat)
      if (idx < 0 || idx >= static_cast<int>(spec_list.size()))
        throw nl::InvalidInputError("pattern index " + std::to_string(idx) +
                                    " outside the spec list");

    const auto stats = parse_statistics(statistics);
    const int p = spec_list.front().replicas;
    nl::wick::ContractionRule rule;
    if (!weight_diagonal.empty()) {
      const auto d = parse_double_list(weight_diagonal, "--weight-diagonal");
      rule = nl::wick::ContractionRule::diagonal(stats, d);
    } else {
      rule = nl::wick::ContractionRule::kronecker(stats, p);
    }

    std::vector<nl::quenching::QuenchingSpec> ordered;
    ordered.reserve(pat.size());
    for (int idx : pat) ordered.push_back(spec_list[static_cast<std::size_t>(idx)]);
    const double value = nl::quenching::quenched_algebraic_moment(ordered, rule);
    std::cout << "algebraic value = " << fmt(value) << "\n";

    ctx.options.set("uniform-p", uniform_p);
    ctx.options.set("specs", specs);
    ctx.options.set("pattern", pattern);
    ctx.options.set("statistics", statistics);
    ctx.options.set("weight-diagonal", weight_diagonal);
    ctx.options.set("mc", mc);
    ctx.options.set("n", n);
    ctx.options.set("samples", samples);

    Json out = Json::object();
    Json jspecs = Json::array();
    for (const auto& s : spec_list) {
      Json arr = Json::array();
      for (double c : s.coefficients) arr.push(c);
      jspecs.push(std::move(arr));
    }
    out.set("specs", std::move(jspecs));
    out.set("pattern", join_ints(pat, '-'));
    out.set("statistics", statistics);
    out.set("algebraic_value", value);

    if (mc) {
      nl::random_matrix::EnsembleConfig ec;
      ec.n = n;
      ec.replicas = p;
      ec.samples = samples;
      ec.seed = ctx.seed;
      ec.workers = ctx.workers;
      const auto est = nl::quenching::quenched_trace_moment(spec_list, pat, ec);
      std::cout << "matrix estimate = " << fmt(est.value) << " (stderr "
                << fmt(est.std_error) << ")\n";
      Json jmc = Json::object();
      jmc.set("n", n);
      jmc.set("samples", samples);
      jmc.set("estimate", est.value);
      jmc.set("std_error", est.std_error);
      out.set("monte_carlo", std::move(jmc));
    } else {
      out.set("monte_carlo", Json());
    }
    ctx.emit("quench.json", out.dump());
  }
};

struct PartitionCmd {
  int n_spins = 4;
  double beta = 1.0;
  std::string beta_grid;
  int replicas = 1;
  std::string coefficients;
  std::string method = "mc";
  int gauss_samples = 10000;
  int gh_order = 8;

  CLI::App* cmd = nullptr;
  CLI::Option *o_n = nullptr, *o_beta = nullptr, *o_grid = nullptr, *o_replicas = nullptr,
              *o_coeff = nullptr, *o_method = nullptr, *o_draws = nullptr,
              *o_order = nullptr;

  void setup(CLI::App& app) {
    cmd = app.add_subcommand("partition", "Replica partition sum of the coupled spin model");
    cmd->fallthrough();
    o_n = cmd->add_option("--n-spins", n_spins, "Spins per replica")->capture_default_str();
    o_beta = cmd->add_option("--beta", beta, "Inverse temperature")->capture_default_str();
    o_grid = cmd->add_option("--beta-grid", beta_grid, "Sweep betas, comma separated");
    o_replicas = cmd->add_option("--replicas", replicas, "Replica count p")
                     ->capture_default_str();
    o_coeff = cmd->add_option("--coefficients", coefficients,
                              "Quenching coefficients (default: uniform)");
    o_method = cmd->add_option("--method", method, "mc|quadrature")->capture_default_str();
    o_draws = cmd->add_option("--gauss-samples", gauss_samples, "Monte Carlo draws")
                  ->capture_default_str();
    o_order = cmd->add_option("--gh-order", gh_order, "Quadrature points per dimension")
                  ->capture_default_str();
    o_beta->excludes(o_grid);
  }

  void fill(ConfigFile& cfg) {
    cfg.fill_int(o_n, "n-spins", n_spins);
    cfg.fill_double(o_beta, "beta", beta);
    cfg.fill_list(o_grid, "beta-grid", beta_grid);
    cfg.fill_int(o_replicas, "replicas", replicas);
    cfg.fill_list(o_coeff, "coefficients", coefficients);
    cfg.fill_string(o_method, "method", method);
    cfg.fill_int(o_draws, "gauss-samples", gauss_samples);
    cfg.fill_int(o_order, "gh-order", gh_order);
  }

  void run(RunContext& ctx) {
    nl::quenching::QuenchingSpec spec;
    if (coefficients.empty()) {
      spec = nl::quenching::QuenchingSpec::uniform(replicas);
    } else {
      spec.coefficients = parse_double_list(coefficients, "--coefficients");
      spec.replicas = static_cast<int>(spec.coefficients.size());
      if (spec.replicas != replicas)
        throw nl::InvalidInputError("--coefficients length disagrees with --replicas");
    }
    const auto pm = parse_method(method);

    nl::quenching::ReplicaModelConfig mc;
    mc.n_spins = n_spins;
    mc.replicas = replicas;
    mc.gauss_samples = gauss_samples;
    mc.gh_order = gh_order;
    mc.seed = ctx.seed;
    mc.workers = ctx.workers;

    ctx.options.set("n-spins", n_spins);
    ctx.options.set("beta", beta);
    ctx.options.set("beta-grid", beta_grid);
    ctx.options.set("replicas", replicas);
    ctx.options.set("coefficients", coefficients);
    ctx.options.set("method", method);
    ctx.options.set("gauss-samples", gauss_samples);
    ctx.options.set("gh-order", gh_order);

    if (!beta_grid.empty()) {
      std::vector<double> betas = parse_double_list(beta_grid, "--beta-grid");
      std::sort(betas.begin(), betas.end());
      betas.erase(std::unique(betas.begin(), betas.end()), betas.end());
      Csv csv({"beta", "z", "std_error"});
      for (double b : betas) {
        mc.beta = b;
        const auto r = nl::quenching::replica_partition(mc, spec, pm);
        csv.add_row({Csv::cell(b), Csv::cell(r.z), Csv::cell(r.std_error)});
      }
      std::cout << "swept " << betas.size() << " betas\n";
      ctx.emit("partition.csv", csv.dump());
      return;
    }

    mc.beta = beta;
    const auto r = nl::quenching::replica_partition(mc, spec, pm);
    std::cout << "Z = " << fmt(r.z) << " (stderr " << fmt(r.std_error) << ")\n";

    Json out = Json::object();
    Json jspec = Json::object();
    jspec.set("replicas", spec.replicas);
    Json coeff = Json::array();
    for (double c : spec.coefficients) coeff.push(c);
    jspec.set("coefficients", std::move(coeff));
    out.set("spec", std::move(jspec));
    Json jcfg = Json::object();
    jcfg.set("n_spins", n_spins);
    jcfg.set("beta", beta);
    jcfg.set("gauss_samples", gauss_samples);
    jcfg.set("gh_order", gh_order);
    jcfg.set("seed", ctx.seed);
    out.set("config", std::move(jcfg));
    out.set("z", r.z);
    out.set("std_error", r.std_error);
    out.set("method", method);
    out.set("normalization", "gaussian-probability-measure");
    ctx.emit("partition.json", out.dump());
  }
};

Json chsh_result_json(const nl::bell::CHSHResult& r) {
  Json out = Json::object();
  out.set("s", r.s);
  Json c = Json::object();
  c.set("a1b1", r.correlators[0]);
  c.set("a1b2", r.correlators[1]);
  c.set("a2b1", r.correlators[2]);
  c.set("a2b2", r.correlators[3]);
  out.set("correlators", std::move(c));
  Json raw = Json::object();
  raw.set("a1b1", r.raw_correlators[0]);
  raw.set("a1b2", r.raw_correlators[1]);
  raw.set("a2b1", r.raw_correlators[2]);
  raw.set("a2b2", r.raw_correlators[3]);
  out.set("raw_correlators", std::move(raw));
  Json side = Json::object();
  side.set("a1a2", r.side_commutator_norms[0]);
  side.set("b1b2", r.side_commutator_norms[1]);
  out.set("side_commutator_norms", std::move(side));
  if (r.backend == nl::bell::BackendKind::Fock) {
    Json cross = Json::object();
    cross.set("a1b1", r.cross_commutator_norms[0]);
    cross.set("a1b2", r.cross_commutator_norms[1]);
    cross.set("a2b1", r.cross_commutator_norms[2]);
    cross.set("a2b2", r.cross_commutator_norms[3]);
    out.set("cross_commutator_norms", std::move(cross));
    out.set("std_error", Json());
  } else {
    out.set("cross_commutator_norms", Json());
    out.set("std_error", r.std_error);
  }
  out.set("backend", r.backend == nl::bell::BackendKind::Fock ? "fock" : "classical");
  out.set("truncation_level", r.truncation_level);
  return out;
}

Json observables_json(const std::array<nl::bell::ObservableSpec, 4>& obs) {
  Json arr = Json::array();
  for (const auto& spec : obs) {
    Json coeff = Json::array();
    for (double c : spec.coefficients) coeff.push(c);
    arr.push(std::move(coeff));
  }
  return arr;
}

struct ChshCmd {
  std::string observables;
  std::string transform = "sign";
  bool quenched = false;
  std::string backend = "fock";
  int level = 3;
  int samples = 10000;

  CLI::App* cmd = nullptr;
  CLI::Option *o_obs = nullptr, *o_transform = nullptr, *o_quenched = nullptr,
              *o_backend = nullptr, *o_level = nullptr, *o_samples = nullptr;

  void setup(CLI::App& app) {
    cmd = app.add_subcommand("chsh", "CHSH functional on four observables");
    cmd->fallthrough();
    o_obs = cmd->add_option("--observables", observables,
                            "Four coefficient vectors A1;A2;B1;B2");
    o_transform = cmd->add_option("--transform", transform, "sign|clamp")
                      ->capture_default_str();
    o_quenched = cmd->add_flag("--quenched", quenched, "Rescale coefficients by 1/sqrt(p)");
    o_backend = cmd->add_option("--backend", backend, "fock|classical")
                    ->capture_default_str();
    o_level = cmd->add_option("--level", level, "Fock truncation depth")
                  ->capture_default_str();
    o_samples = cmd->add_option("--samples", samples, "Classical backend samples")
                    ->capture_default_str();
  }

  void fill(ConfigFile& cfg) {
    cfg.fill_nested_list(o_obs, "observables", observables);
    cfg.fill_string(o_transform, "transform", transform);
    cfg.fill_bool(o_quenched, "quenched", quenched);
    cfg.fill_string(o_backend, "backend", backend);
    cfg.fill_int(o_level, "level", level);
    cfg.fill_int(o_samples, "samples", samples);
  }

  nl::bell::CHSHConfig build(const RunContext& ctx) const {
    if (observables.empty()) throw nl::InvalidInputError("missing --observables");
    const auto groups = parse_vector_list(observables, "--observables");
    if (groups.size() != 4)
      throw nl::InvalidInputError("--observables needs exactly four vectors");
    const auto tf = parse_transform(transform);
    nl::bell::CHSHConfig cc;
    for (std::size_t i = 0; i < 4; ++i) {
      cc.observables[i].coefficients = groups[i];
      cc.observables[i].transform = tf;
      cc.observables[i].quenched = quenched;
    }
    cc.backend = parse_backend(backend);
    cc.truncation_level = level;
    cc.samples = samples;
    cc.seed = ctx.seed;
    cc.workers = ctx.workers;
    return cc;
  }

  void run(RunContext& ctx) {
    const nl::bell::CHSHConfig cc = build(ctx);
    const auto result = nl::bell::chsh_value(cc);
    std::cout << "S = " << fmt(result.s) << "\n";

    ctx.options.set("observables", observables);
    ctx.options.set("transform", transform);
    ctx.options.set("quenched", quenched);
    ctx.options.set("backend", backend);
    ctx.options.set("level", level);
    ctx.options.set("samples", samples);

    Json out = Json::object();
    Json jcfg = Json::object();
    jcfg.set("observables", observables_json(cc.observables));
    jcfg.set("transform", transform);
    jcfg.set("quenched", quenched);
    jcfg.set("backend", backend);
    jcfg.set("truncation_level", level);
    jcfg.set("samples", samples);
    jcfg.set("seed", ctx.seed);
    out.set("config", std::move(jcfg));
    Json res = chsh_result_json(result);
    out.set("result", std::move(res));
    ctx.emit("chsh.json", out.dump());
  }
};

struct ChshSearchCmd {
  int modes = 2;
  std::string transform = "sign";
  bool quenched = false;
  int grid_points = 5;
  int refine_steps = 6;
  std::string backend = "fock";
  int level = 3;
  int samples = 10000;

  CLI::App* cmd = nullptr;
  CLI::Option *o_modes = nullptr, *o_transform = nullptr, *o_quenched = nullptr,
              *o_grid = nullptr, *o_refine = nullptr, *o_backend = nullptr,
              *o_level = nullptr, *o_samples = nullptr;

  void setup(CLI::App& app) {
    cmd = app.add_subcommand("chsh-search", "Search coefficient space for maximal |S|");
    cmd->fallthrough();
    o_modes = cmd->add_option("--modes", modes, "Modes per observable")
                  ->capture_default_str();
    o_transform = cmd->add_option("--transform", transform, "sign|clamp")
                      ->capture_default_str();
    o_quenched = cmd->add_flag("--quenched", quenched, "Rescale coefficients by 1/sqrt(p)");
    o_grid = cmd->add_option("--grid-points", grid_points, "Grid points per angle")
                 ->capture_default_str();
    o_refine = cmd->add_option("--refine-steps", refine_steps, "Refinement sweeps")
                   ->capture_default_str();
    o_backend = cmd->add_option("--backend", backend, "fock|classical")
                    ->capture_default_str();
    o_level = cmd->add_option("--level", level, "Fock truncation depth")
                  ->capture_default_str();
    o_samples = cmd->add_option("--samples", samples, "Classical backend samples")
                    ->capture_default_str();
  }

  void fill(ConfigFile& cfg) {
    cfg.fill_int(o_modes, "modes", modes);
    cfg.fill_string(o_transform, "transform", transform);
    cfg.fill_bool(o_quenched, "quenched", quenched);
    cfg.fill_int(o_grid, "grid-points", grid_points);
    cfg.fill_int(o_refine, "refine-steps", refine_steps);
    cfg.fill_string(o_backend, "backend", backend);
    cfg.fill_int(o_level, "level", level);
    cfg.fill_int(o_samples, "samples", samples);
  }

  void run(RunContext& ctx) {
    nl::bell::SearchConfig sc;
    sc.modes = modes;
    sc.transform = parse_transform(transform);
    sc.quenched = quenched;
    sc.grid_points = grid_points;
    sc.refine_steps = refine_steps;
    sc.backend = parse_backend(backend);
    sc.truncation_level = level;
    sc.samples = samples;
    sc.seed = ctx.seed;
    sc.workers = ctx.workers;

    const auto res = nl::bell::maximize_chsh(sc);
    std::cout << "best S = " << fmt(res.best.s) << " over " << res.trace.size()
              << " evaluations\n";

    ctx.options.set("modes", modes);
    ctx.options.set("transform", transform);
    ctx.options.set("quenched", quenched);
    ctx.options.set("grid-points", grid_points);
    ctx.options.set("refine-steps", refine_steps);
    ctx.options.set("backend", backend);
    ctx.options.set("level", level);
    ctx.options.set("samples", samples);

    Json out = Json::object();
    Json jcfg = Json::object();
    jcfg.set("modes", modes);
    jcfg.set("transform", transform);
    jcfg.set("quenched", quenched);
    jcfg.set("grid-points", grid_points);
    jcfg.set("refine-steps", refine_steps);
    jcfg.set("backend", backend);
    jcfg.set("truncation_level", level);
    jcfg.set("samples", samples);
    jcfg.set("seed", ctx.seed);
    out.set("search", std::move(jcfg));
    Json best_cfg = Json::object();
    best_cfg.set("observables", observables_json(res.best_config.observables));
    best_cfg.set("transform", transform);
    best_cfg.set("quenched", quenched);
    out.set("best_config", std::move(best_cfg));
    Json best = chsh_result_json(res.best);
    out.set("best", std::move(best));
    ctx.emit("search.json", out.dump());

    const int angles_per = modes > 0 ? modes - 1 : 0;
    std::vector<std::string> header{"stage", "index", "s"};
    const char* roles[4] = {"a1", "a2", "b1", "b2"};
    for (const char* role : roles)
      for (int a = 0; a < angles_per; ++a)
        header.push_back(std::string(role) + "_" + std::to_string(a));
    Csv csv(std::move(header));
    for (const auto& row : res.trace) {
      std::vector<std::string> cells{row.refined ? "refine" : "grid",
                                     Csv::cell(static_cast<std::int64_t>(row.index)),
                                     Csv::cell(row.s)};
      for (double a : row.angles) cells.push_back(Csv::cell(a));
      csv.add_row(std::move(cells));
    }
    ctx.emit("search_trace.csv", csv.dump());
  }
};

// ------------------------------------------------------------------ main

int run_cli(int argc, char** argv) {
  CLI::App app{"noncommutative probability laboratory"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir;
  std::uint64_t seed = 1;
  int workers = 1;
  std::string kernel = "auto";

  app.add_option("--config", config_path, "JSON config file");
  auto* o_out = app.add_option("--out", out_dir,
                               "Output directory (default: $NCLAB_OUT_DIR or .)");
  auto* o_seed = app.add_option("--seed", seed, "Base random seed")->capture_default_str();
  auto* o_workers = app.add_option("--workers", workers, "Thread cap")
                       ->capture_default_str();
  auto* o_kernel = app.add_option("--kernel", kernel, "auto|scalar|avx2")
                       ->capture_default_str();

  MomentsCmd moments;
  FockCmd fock;
  LimitCmd limit;
  WignerCmd wigner;
  QuenchCmd quench;
  PartitionCmd partition;
  ChshCmd chsh;
  ChshSearchCmd search;
  moments.setup(app);
  fock.setup(app);
  limit.setup(app);
  wigner.setup(app);
  quench.setup(app);
  partition.setup(app);
  chsh.setup(app);
  search.setup(app);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);  // prints help, returns 0
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  ConfigFile cfg;
  if (!config_path.empty()) cfg.load(config_path);

  cfg.fill_string(o_out, "out", out_dir);
  cfg.fill_u64(o_seed, "seed", seed);
  cfg.fill_int(o_workers, "workers", workers);
  cfg.fill_string(o_kernel, "kernel", kernel);
  if (out_dir.empty()) {
    const char* env = std::getenv("NCLAB_OUT_DIR");
    out_dir = (env != nullptr && env[0] != '\0') ? env : ".";
  }
  if (workers < 1) throw nl::InvalidInputError("--workers must be at least 1");

  nl::kernels::reset_backend();
  if (kernel == "scalar") {
    nl::kernels::set_backend(nl::kernels::Backend::Scalar);
  } else if (kernel == "avx2") {
    if (nl::kernels::active_backend() != nl::kernels::Backend::Avx2)
      throw nl::ConfigError("avx2 kernels are unavailable on this cpu");
  } else if (kernel != "auto") {
    throw nl::InvalidInputError("unknown kernel '" + kernel + "' (auto|scalar|avx2)");
  }

  RunContext ctx;
  ctx.out_dir = out_dir;
  ctx.seed = seed;
  ctx.workers = workers;

  // fail on an unwritable output directory before any computation
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(fs::path(out_dir), ec);
  if (ec) throw nl::IoError("cannot create output directory: " + out_dir);
  {
    const fs::path probe = fs::path(out_dir) / ".nclab_write_probe";
    std::ofstream f(probe, std::ios::binary | std::ios::trunc);
    f << "x";
    f.close();
    if (f.fail()) throw nl::IoError("output directory is not writable: " + out_dir);
    fs::remove(probe, ec);
  }

  if (moments.cmd->parsed()) {
    ctx.subcommand = "moments";
    moments.fill(cfg);
    cfg.ensure_all_consumed(ctx.subcommand);
    moments.run(ctx);
  } else if (fock.cmd->parsed()) {
    ctx.subcommand = "fock";
    fock.fill(cfg);
    cfg.ensure_all_consumed(ctx.subcommand);
    fock.run(ctx);
  } else if (limit.cmd->parsed()) {
    ctx.subcommand = "limit";
    limit.fill(cfg);
    cfg.ensure_all_consumed(ctx.subcommand);
    limit.run(ctx);
  } else if (wigner.cmd->parsed()) {
    ctx.subcommand = "wigner";
    wigner.fill(cfg);
    cfg.ensure_all_consumed(ctx.subcommand);
    wigner.run(ctx);
  } else if (quench.cmd->parsed()) {
    ctx.subcommand = "quench";
    quench.fill(cfg);
    cfg.ensure_all_consumed(ctx.subcommand);
    quench.run(ctx);
  } else if (partition.cmd->parsed()) {
    ctx.subcommand = "partition";
    partition.fill(cfg);
    cfg.ensure_all_consumed(ctx.subcommand);
    partition.run(ctx);
  } else if (chsh.cmd->parsed()) {
    ctx.subcommand = "chsh";
    chsh.fill(cfg);
    cfg.ensure_all_consumed(ctx.subcommand);
    chsh.run(ctx);
  } else if (search.cmd->parsed()) {
    ctx.subcommand = "chsh-search";
    search.fill(cfg);
    cfg.ensure_all_consumed(ctx.subcommand);
    search.run(ctx);
  }

  write_outputs(ctx);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run_cli(argc, argv);
  } catch (const nl::InvalidInputError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const nl::ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const nl::CapacityError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
}
