// interlace: lattice potential theory, exact occupation-time functionals and
// Monte Carlo sampling of random interlacements, from the command line.

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "interlace/box2d.hpp"
#include "interlace/functionals.hpp"
#include "interlace/gaussfield.hpp"
#include "interlace/green.hpp"
#include "interlace/parallel.hpp"
#include "interlace/potential.hpp"
#include "interlace/rods.hpp"
#include "interlace/sampler.hpp"
#include "interlace/stats.hpp"
#include "interlace/verify.hpp"

using nlohmann::json;
using namespace interlace;

namespace {

constexpr const char* kVersion = "interlace 0.1.0";

struct OutputTarget {
  std::string path;  // empty = stdout

  void write(const std::string& content) const {
    if (path.empty()) {
      std::fputs(content.c_str(), stdout);
      return;
    }
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::invalid_argument("cannot open output file: " + path);
    os << content;
  }
};

json load_config(const std::string& inline_json, const std::string& path) {
  if (!inline_json.empty()) return json::parse(inline_json);
  if (!path.empty()) {
    std::ifstream is(path);
    if (!is) throw std::invalid_argument("cannot open config file: " + path);
    return json::parse(is);
  }
  throw std::invalid_argument("missing configuration (--config or inline JSON)");
}

std::vector<Point> parse_points(const json& arr, int expect_dim) {
  if (!arr.is_array() || arr.empty())
    throw std::invalid_argument("expected a nonempty array of points");
  std::vector<Point> pts;
  for (const auto& row : arr) {
    if (!row.is_array() || (expect_dim > 0 && (int)row.size() != expect_dim))
      throw std::invalid_argument("point with wrong dimension in site list");
    std::vector<int> cs;
    for (const auto& c : row) {
      if (!c.is_number_integer()) throw std::invalid_argument("non-integer coordinate");
      cs.push_back(c.get<int>());
    }
    pts.emplace_back(cs);
  }
  return pts;
}

Eigen::VectorXd parse_vector(const json& arr, std::size_t n, const char* what) {
  if (!arr.is_array() || arr.size() != n)
    throw std::invalid_argument(std::string(what) + ": expected array of matching length");
  Eigen::VectorXd v(n);
  for (std::size_t i = 0; i < n; ++i) v[i] = arr[i].get<double>();
  return v;
}

void reject_unknown_keys(const json& cfg, std::initializer_list<const char*> known) {
  for (auto it = cfg.begin(); it != cfg.end(); ++it) {
    bool ok = false;
    for (const char* k : known) ok = ok || (it.key() == k);
    if (!ok) throw std::invalid_argument("unknown config key: " + it.key());
  }
}

std::string format_csv_row(const std::vector<double>& vals) {
  std::string row;
  char buf[64];
  for (std::size_t i = 0; i < vals.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%.15g", vals[i]);
    if (i) row += ',';
    row += buf;
  }
  row += '\n';
  return row;
}

json verdict_json(const TestVerdict& v) {
  return json{{"id", v.id},       {"reference", v.reference}, {"estimate", v.estimate},
              {"se", v.se},       {"z", v.z},                 {"pass", v.pass},
              {"note", v.note}};
}

json report_json(const SuiteReport& rep) {
  json tests = json::array();
  for (const auto& v : rep.verdicts) tests.push_back(verdict_json(v));
  return json{{"suite", rep.name},
              {"seed", rep.seed},
              {"tests", tests},
              {"statistical_tests", rep.statistical_tests},
              {"exceedances", rep.exceedances},
              {"allowed_exceedances", rep.allowed_exceedances},
              {"pass", rep.pass}};
}

std::string report_csv(const SuiteReport& rep) {
  std::string out = "id,reference,estimate,se,z,pass\n";
  char buf[256];
  for (const auto& v : rep.verdicts) {
    std::snprintf(buf, sizeof buf, "%s,%.15g,%.15g,%.15g,%.15g,%d\n", v.id.c_str(), v.reference,
                  v.estimate, v.se, v.z, (int)v.pass);
    out += buf;
  }
  return out;
}

void write_meta(const std::string& path, const std::string& command) {
  if (path.empty()) return;
  const auto now = std::chrono::system_clock::now().time_since_epoch();
  json meta{{"version", kVersion},
            {"command", command},
            {"unix_time", std::chrono::duration_cast<std::chrono::seconds>(now).count()}};
  std::ofstream os(path);
  os << meta.dump(2) << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"random-interlacement occupation times: exact functionals, potential theory "
               "and Monte Carlo verification"};
  app.set_version_flag("--version", kVersion);

  std::uint64_t seed = 1;
  long replicas = 100000;
  int workers = default_workers();
  std::string out_path, csv_path, meta_path, config_path, config_inline, format = "csv";
  app.add_option("--seed", seed, "base RNG seed");
  app.add_option("--replicas", replicas, "Monte Carlo replica count");
  app.add_option("--workers", workers, "worker threads (default: INTERLACE_WORKERS or cores)");
  app.add_option("--out", out_path, "primary output file (default stdout)");
  app.add_option("--csv", csv_path, "secondary CSV output file (verify)");
  app.add_option("--meta", meta_path, "metadata file (timestamps live here, not in outputs)");
  app.add_option("--config", config_path, "JSON configuration file");
  app.add_option("--json", config_inline, "inline JSON configuration");
  app.add_option("--format", format, "output format: csv | json | binary (sample)");
  app.require_subcommand(1);

  app.fallthrough();  // global options may follow the subcommand name

  int quad_order = 48;
  auto* green_cmd = app.add_subcommand("green", "free Green function g(x) on Z^d, d >= 3");
  int green_dim = 3;
  green_cmd->add_option("--dim", green_dim, "lattice dimension (>= 3)");
  green_cmd->add_option("--quad-nodes", quad_order,
                        "Gauss-Legendre nodes per quadrature panel (default 48)");

  auto* akernel_cmd = app.add_subcommand("akernel", "planar potential kernel a(y)");
  akernel_cmd->add_option("--quad-nodes", quad_order,
                          "Gauss-Legendre nodes per quadrature panel (default 48)");

  auto* capacity_cmd =
      app.add_subcommand("capacity", "equilibrium measure and capacity of a site list");
  bool with_subsets = false;
  capacity_cmd->add_flag("--subsets", with_subsets, "include the full subset table");

  auto* laplace_cmd =
      app.add_subcommand("laplace", "exact Laplace functional of the occupation field");
  auto* coeffs_cmd =
      app.add_subcommand("coeffs", "power-series coefficients u (V,(GV)^{n-1} 1)");
  auto* sample_cmd = app.add_subcommand("sample", "sample interlacement occupation fields");
  double sample_u = 1.0;
  bool aggregate = false;
  std::string mode = "exact";
  sample_cmd->add_option("-u,--level", sample_u, "interlacement level u");
  sample_cmd->add_flag("--aggregate", aggregate, "emit per-site moment table instead of rows");
  sample_cmd->add_option("--mode", mode, "escape mode: exact | truncation");

  auto* rods_cmd = app.add_subcommand("rods", "rod coefficient tables over an N grid");
  auto* verify_cmd = app.add_subcommand("verify", "run a named verification suite");
  std::string suite;
  verify_cmd->add_option("suite", suite, "exact-id | marginals | high-u | rods-coeffs")
      ->required();

  CLI11_PARSE(app, argc, argv);

  std::string command;
  for (int i = 0; i < argc; ++i) command += std::string(i ? " " : "") + argv[i];

  try {
    OutputTarget out{out_path};
    GreenQuadOptions gopts;
    gopts.gl_order = quad_order;

    if (green_cmd->parsed()) {
      json cfg = load_config(config_inline, config_path);
      reject_unknown_keys(cfg, {"points"});
      FreeLatticeGreen g(green_dim, gopts);
      auto pts = parse_points(cfg.at("points"), green_dim);
      std::string body;
      for (const auto& p : pts) {
        std::vector<double> row;
        for (int i = 0; i < p.dim(); ++i) row.push_back(p[i]);
        row.push_back(g.green_origin(p));
        body += format_csv_row(row);
      }
      out.write(body);
    } else if (akernel_cmd->parsed()) {
      json cfg = load_config(config_inline, config_path);
      reject_unknown_keys(cfg, {"points"});
      PotentialKernel2D a(gopts);
      auto pts = parse_points(cfg.at("points"), 2);
      std::string body;
      for (const auto& p : pts)
        body += format_csv_row({(double)p[0], (double)p[1], a(p)});
      out.write(body);
    } else if (capacity_cmd->parsed()) {
      json cfg = load_config(config_inline, config_path);
      reject_unknown_keys(cfg, {"dim", "sites"});
      const int d = cfg.value("dim", 3);
      FreeLatticeGreen g(d);
      SiteSet<FreeLatticeGreen> K(g, parse_points(cfg.at("sites"), d));
      json res{{"capacity", K.capacity()}};
      json eq = json::array();
      for (int i = 0; i < K.size(); ++i) eq.push_back(K.equilibrium()[i]);
      res["equilibrium"] = eq;
      if (with_subsets) {
        SubsetTable tab(K);
        json subs = json::array();
        for (std::uint32_t m = 0; m < (1u << K.size()); ++m)
          subs.push_back(json{{"mask", m}, {"g", tab.g(m)}, {"c", tab.c(m)}});
        res["subsets"] = subs;
      }
      out.write(res.dump(2) + "\n");
    } else if (laplace_cmd->parsed()) {
      json cfg = load_config(config_inline, config_path);
      reject_unknown_keys(cfg, {"dim", "sites", "V", "u"});
      const int d = cfg.value("dim", 3);
      FreeLatticeGreen g(d);
      SiteSet<FreeLatticeGreen> K(g, parse_points(cfg.at("sites"), d));
      Eigen::VectorXd V = parse_vector(cfg.at("V"), K.size(), "V");
      const double u = cfg.at("u").get<double>();
      json res{{"u", u}};
      const double norm = functionals::gv_linf_norm(functionals::gv_matrix(K, V));
      res["gv_linf_norm"] = norm;
      bool have = false;
      if ((V.array() >= 0).all()) {
        res["value_subsets"] = functionals::laplace_exact_subsets(K, V, u);
        res["value"] = res["value_subsets"];
        have = true;
      }
      if (norm < 1.0) {
        res["value_operator"] = functionals::laplace_exact_operator(K, V, u);
        if (!have) res["value"] = res["value_operator"];
        have = true;
      }
      if (!have)
        throw std::domain_error(
            "V has negative entries and ||GV|| >= 1: no exact route applies");
      out.write(res.dump(2) + "\n");
    } else if (coeffs_cmd->parsed()) {
      json cfg = load_config(config_inline, config_path);
      reject_unknown_keys(cfg, {"dim", "sites", "V", "u", "n_max"});
      const int d = cfg.value("dim", 3);
      FreeLatticeGreen g(d);
      SiteSet<FreeLatticeGreen> K(g, parse_points(cfg.at("sites"), d));
      Eigen::VectorXd V = parse_vector(cfg.at("V"), K.size(), "V");
      auto coeffs =
          functionals::series_coefficients(K, V, cfg.at("u").get<double>(),
                                           cfg.value("n_max", 16));
      std::string body;
      for (std::size_t i = 0; i < coeffs.size(); ++i)
        body += format_csv_row({(double)(i + 1), coeffs[i]});
      out.write(body);
    } else if (sample_cmd->parsed()) {
      json cfg = load_config(config_inline, config_path);
      reject_unknown_keys(cfg, {"dim", "window"});
      const int d = cfg.value("dim", 3);
      FreeLatticeGreen g(d);
      SiteSet<FreeLatticeGreen> K(g, parse_points(cfg.at("window"), d));
      SamplerConfig scfg;
      scfg.seed = seed;
      scfg.replicas = replicas;
      scfg.workers = workers;
      scfg.backward_steps = 0;
      if (mode == "truncation")
        scfg.mode = SamplerConfig::EscapeMode::truncation;
      else if (mode != "exact")
        throw std::invalid_argument("unknown escape mode: " + mode);
      InterlacementSampler sampler(K, scfg);
      const int m = K.size();
      std::vector<int> win(m);
      for (int i = 0; i < m; ++i) win[i] = i;
      std::vector<Eigen::VectorXd> ls(replicas);
      std::vector<Eigen::VectorXi> ns(replicas);
      sampler.for_each_replica(sample_u, [&](long r, const std::vector<Trajectory>& ts) {
        auto f = sampler.occupation_field(ts, win, sample_u);
        ls[r] = std::move(f.continuous);
        ns[r] = std::move(f.discrete);
      });
      if (aggregate) {
        std::string body = "site,mean_L,var_L,mean_count,vacancy\n";
        for (int i = 0; i < m; ++i) {
          double mean = 0, m2 = 0, cnt = 0, vac = 0;
          for (long r = 0; r < replicas; ++r) mean += ls[r][i];
          mean /= replicas;
          for (long r = 0; r < replicas; ++r) m2 += (ls[r][i] - mean) * (ls[r][i] - mean);
          for (long r = 0; r < replicas; ++r) cnt += ns[r][i];
          for (long r = 0; r < replicas; ++r) vac += (ns[r][i] == 0);
          char buf[160];
          std::snprintf(buf, sizeof buf, "%d,%.15g,%.15g,%.15g,%.15g\n", i, mean,
                        m2 / (replicas - 1), cnt / replicas, vac / replicas);
          body += buf;
        }
        out.write(body);
      } else if (format == "binary") {
        // layout (little endian): magic "ILSF", u32 version=1, u32 sites m,
        // u64 replicas, then per replica: m f64 occupation times, m u32 counts
        std::string body;
        body.reserve(16 + replicas * m * 12);
        body += "ILSF";
        auto push32 = [&](std::uint32_t v) { body.append((const char*)&v, 4); };
        auto push64 = [&](std::uint64_t v) { body.append((const char*)&v, 8); };
        push32(1);
        push32((std::uint32_t)m);
        push64((std::uint64_t)replicas);
        for (long r = 0; r < replicas; ++r) {
          for (int i = 0; i < m; ++i) {
            const double v = ls[r][i];
            body.append((const char*)&v, 8);
          }
          for (int i = 0; i < m; ++i) push32((std::uint32_t)ns[r][i]);
        }
        out.write(body);
      } else {
        std::string body = "replica";
        for (int i = 0; i < m; ++i) body += ",L" + std::to_string(i);
        for (int i = 0; i < m; ++i) body += ",n" + std::to_string(i);
        body += '\n';
        for (long r = 0; r < replicas; ++r) {
          std::vector<double> row{(double)r};
          for (int i = 0; i < m; ++i) row.push_back(ls[r][i]);
          for (int i = 0; i < m; ++i) row.push_back(ns[r][i]);
          body += format_csv_row(row);
        }
        out.write(body);
      }
    } else if (rods_cmd->parsed()) {
      json cfg = load_config(config_inline, config_path);
      reject_unknown_keys(cfg, {"kind", "lambda", "W", "alpha", "n_grid", "n_max"});
      FreeLatticeGreen g(3);
      PotentialKernel2D a;
      const std::string kind = cfg.value("kind", "a");
      const double alpha = cfg.value("alpha", 1.0);
      std::vector<long> grid;
      for (const auto& n : cfg.at("n_grid")) grid.push_back(n.get<long>());
      std::string body = "N,n,value,limit,error\n";
      if (kind == "tau") {
        for (long n : grid) {
          const double t = tau_n(g, n, workers);
          body += format_csv_row({(double)n, 0.0, t, 3.0 / (2.0 * kPi),
                                  t - 3.0 / (2.0 * kPi)});
        }
      } else if (kind == "tilde") {
        const int n_max = cfg.value("n_max", 3);
        for (long n : grid) {
          auto c = coeff_tilde_a_n(g, alpha, n, n_max, workers);
          for (int k = 1; k <= n_max; ++k) {
            const double lim = alpha * std::pow(3.0 / kPi, k - 1);
            body += format_csv_row({(double)n, (double)k, c.a[k - 1], lim, c.a[k - 1] - lim});
          }
        }
      } else if (kind == "a") {
        auto lam = parse_points(cfg.at("lambda"), 2);
        Eigen::VectorXd w = parse_vector(cfg.at("W"), lam.size(), "W");
        const double ew = energy(a, lam, w);
        const int n_max = cfg.value("n_max", 4);
        for (long n : grid) {
          auto c = coeff_a_n(g, lam, w, alpha, n, n_max, workers);
          for (int k = 1; k <= n_max; ++k) {
            double lim = 0.0;
            if (k % 2 == 0)
              lim = 0.5 * alpha * ew * std::pow(3.0 / (2.0 * kPi) * ew, k / 2 - 1);
            body += format_csv_row({(double)n, (double)k, c.a[k - 1], lim, c.a[k - 1] - lim});
          }
        }
      } else {
        throw std::invalid_argument("rods kind must be a | tilde | tau");
      }
      out.write(body);
    } else if (verify_cmd->parsed()) {
      verify::VerifyOptions opt;
      opt.seed = seed;
      opt.replicas = replicas;
      opt.workers = workers;
      SuiteReport rep;
      if (suite == "exact-id")
        rep = verify::suite_exact_id(seed);
      else if (suite == "marginals")
        rep = verify::suite_marginals(opt);
      else if (suite == "high-u")
        rep = verify::suite_high_u(opt);
      else if (suite == "rods-coeffs")
        rep = verify::suite_rods_coeffs(opt);
      else
        throw std::invalid_argument("unknown suite: " + suite);
      out.write(report_json(rep).dump(2) + "\n");
      if (!csv_path.empty()) OutputTarget{csv_path}.write(report_csv(rep));
      write_meta(meta_path, command);
      return rep.pass ? 0 : 3;
    }
    write_meta(meta_path, command);
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "error (validation): %s\n", e.what());
    return 1;
  } catch (const json::exception& e) {
    std::fprintf(stderr, "error (validation): %s\n", e.what());
    return 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  return 0;
}
