// kicked: command-line front end for the kicked-product lab.
//
// Every subcommand accepts --config FILE with a flat JSON object whose keys
// are long option names; flags given on the command line win. Outputs go to
// --out-dir, which defaults to $KICKED_OUT_DIR or the current directory.
//
// Exit codes: 0 success, 1 usage or input error, 2 numerical abort.

#include "kicked/analysis.hpp"
#include "kicked/construct_eus.hpp"
#include "kicked/construct_seq.hpp"
#include "kicked/errors.hpp"
#include "kicked/eus_io.hpp"
#include "kicked/kick_spec.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <memory>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using nlohmann::json;
using namespace kicked;

namespace {

// Flat JSON object of option values for whichever subcommand was selected.
// CLI11 reads config files only at the top level, so the file is attached to
// the main app and each item is routed to the active subcommand.
class JsonConfig : public CLI::Config {
 public:
  explicit JsonConfig(const CLI::App* root) : root_(root) {}

  std::string to_config(const CLI::App*, bool, bool, std::string) const override { return "{}\n"; }

  std::vector<CLI::ConfigItem> from_config(std::istream& in) const override {
    json j;
    try {
      j = json::parse(in);
    } catch (const json::parse_error& e) {
      throw CLI::ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    if (!j.is_object()) throw CLI::ConfigError("config must be a JSON object");
    const auto selected = root_->get_subcommands();
    std::vector<CLI::ConfigItem> items;
    for (const auto& [key, value] : j.items()) {
      CLI::ConfigItem item;
      item.name = key;
      if (!selected.empty()) item.parents = {selected.front()->get_name()};
      if (value.is_array()) {
        for (const auto& v : value) item.inputs.push_back(scalar(v));
      } else {
        item.inputs.push_back(scalar(value));
      }
      items.push_back(std::move(item));
    }
    return items;
  }

 private:
  static std::string scalar(const json& v) {
    if (v.is_string()) return v.get<std::string>();
    if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
    if (v.is_number()) return v.dump();
    throw CLI::ConfigError("config values must be scalars or arrays of scalars");
  }

  const CLI::App* root_;
};

/// Every option of a subcommand with its effective value.
json config_echo(const CLI::App* app) {
  json j = json::object();
  for (const CLI::Option* o : app->get_options()) {
    const std::string name = o->get_single_name();
    if (name == "help" || name == "config" || name == "out-dir" || name == "log") continue;
    const auto& res = o->results();
    if (res.empty()) {
      if (!o->get_default_str().empty()) j[name] = o->get_default_str();
      continue;
    }
    j[name] = res.size() == 1 ? json(res.front()) : json(res);
  }
  return j;
}

std::string default_out_dir() {
  const char* env = std::getenv("KICKED_OUT_DIR");
  return env && *env ? env : ".";
}

fs::path output_path(const std::string& dir, const std::string& name) {
  fs::create_directories(dir);
  return fs::path(dir) / name;
}

void write_json(const fs::path& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << j.dump(2) << '\n';
}

template <class Writer>
void write_text(const fs::path& path, Writer&& w) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  w(out);
}

CLI::App* add_command(CLI::App& app, const std::string& name, const std::string& about, std::string& out_dir) {
  CLI::App* sub = app.add_subcommand(name, about);
  sub->option_defaults()->always_capture_default();
  sub->fallthrough();  // lets `--config` follow the subcommand name
  sub->add_option("--out-dir", out_dir, "Output directory (default $KICKED_OUT_DIR or .)");
  return sub;
}

struct KickArgs {
  std::string spec = "identity";
  std::uint64_t seed = 1;
  double bound = 4.0;
  void attach(CLI::App* sub) {
    sub->add_option("--kicks", spec, "Kick spec: identity, constant-m:C, constant:a,b,c,d, random, "
                                     "triangular:l..;s.., rotation:A, dyadic:c0,.., eus:FILE, seq:t1,..");
    sub->add_option("--seed", seed, "Seed for random kicks");
    sub->add_option("--bound", bound, "Norm bound C for random kicks");
  }
  KickSource make() const { return parse_kick_spec(spec, {seed, bound}); }
};

std::string verdict(bool ok) { return ok ? "PASS" : "FAIL"; }

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Numerical lab for kicked SL(2,R) products"};
  app.require_subcommand(1);
  app.config_formatter(std::make_shared<JsonConfig>(&app));
  app.set_config("--config", "", "JSON file with option values for the subcommand");
  std::string out_dir = default_out_dir();
  std::function<void()> action;

  // scan
  KickArgs scan_kicks;
  ScanOptions scan_opt;
  CLI::App* scan_cmd = add_command(app, "scan", "Classify cells of [0, T] as bounded or growing", out_dir);
  scan_kicks.attach(scan_cmd);
  scan_cmd->add_option("--T", scan_opt.t_max, "Right end of the scanned range")->check(CLI::PositiveNumber);
  scan_cmd->add_option("--cells", scan_opt.cells, "Number of cells")->check(CLI::PositiveNumber);
  scan_cmd->add_option("--N", scan_opt.rule.horizon, "Horizon")->check(CLI::Range(2ull, 1ull << 40));
  scan_cmd->add_option("--M", scan_opt.rule.threshold, "Norm threshold")->check(CLI::PositiveNumber);
  scan_cmd->add_option("--slope-tol", scan_opt.rule.slope_tol, "Slope tolerance (nats per step)");
  scan_cmd->add_flag("--refine", scan_opt.refine_boundary, "Split cells next to a verdict change once");
  scan_cmd->add_option("--workers", scan_opt.workers, "Worker threads (0: all cores)");
  scan_cmd->callback([&] {
    action = [&] {
      const ScanResult r = scan(scan_kicks.make(), scan_opt);
      json summary = scan_summary(r);
      summary["config"] = config_echo(scan_cmd);
      write_text(output_path(out_dir, "scan.csv"), [&](std::ostream& o) { write_scan_csv(o, r); });
      write_json(output_path(out_dir, "scan.json"), summary);
      std::cout << "measure " << fmt17(r.measure) << " (" << r.bounded_cells << " bounded cells)\n";
    };
  });

  // growth-map
  KickArgs map_kicks;
  GrowthMapOptions map_opt;
  CLI::App* map_cmd = add_command(app, "growth-map", "Growth exponents u_N(z) over a complex rectangle", out_dir);
  map_kicks.attach(map_cmd);
  map_cmd->add_option("--re-min", map_opt.re_min);
  map_cmd->add_option("--re-max", map_opt.re_max);
  map_cmd->add_option("--im-min", map_opt.im_min);
  map_cmd->add_option("--im-max", map_opt.im_max);
  map_cmd->add_option("--re-points", map_opt.re_points)->check(CLI::PositiveNumber);
  map_cmd->add_option("--im-points", map_opt.im_points)->check(CLI::PositiveNumber);
  map_cmd->add_option("--N", map_opt.horizon, "Horizon")->check(CLI::PositiveNumber);
  map_cmd->add_option("--workers", map_opt.workers, "Worker threads (0: all cores)");
  map_cmd->callback([&] {
    action = [&] {
      const GrowthMapResult r = growth_map(map_kicks.make(), map_opt);
      json summary = growth_map_summary(r);
      summary["config"] = config_echo(map_cmd);
      write_text(output_path(out_dir, "growth_map.csv"), [&](std::ostream& o) { write_growth_map_csv(o, r); });
      write_json(output_path(out_dir, "growth_map.json"), summary);
      std::cout << "majorization " << summary["majorization"].get<std::string>() << " (" << r.violations
                << " violations)\n";
    };
  });

  // construct-seq
  std::vector<double> seq_targets;
  std::uint64_t seq_horizon = 1u << 15;
  double seq_tol = 1e-6;
  CLI::App* seq_cmd = add_command(app, "construct-seq", "Kicks bounded at prescribed parameters", out_dir);
  seq_cmd->add_option("targets", seq_targets, "Target parameters t_1 .. t_K")->required();
  seq_cmd->add_option("--N", seq_horizon, "Verification horizon")->check(CLI::Range(2ull, 1ull << 40));
  seq_cmd->add_option("--stab-tol", seq_tol, "Allowed growth of the running max between halves (nats)");
  seq_cmd->callback([&] {
    action = [&] {
      const SeqConstruction c(seq_targets);
      json j;
      j["config"] = config_echo(seq_cmd);
      j["targets"] = c.targets();
      j["angles"] = json::array();
      j["square_defects"] = json::array();
      j["verification"] = json::array();
      bool all = true;
      for (std::size_t k = 1; k <= c.size(); ++k) {
        j["angles"].push_back(c.angle(k));
        j["square_defects"].push_back(c.square_defect(k));
        const auto r = verify_bounded(c, k, seq_horizon, std::exp(seq_tol));
        all = all && r.stabilized && c.square_defect(k) <= 1e-9;
        j["verification"].push_back({{"target", r.target},
                                     {"early_max", r.early_max},
                                     {"late_max", r.late_max},
                                     {"stabilized", verdict(r.stabilized)}});
      }
      j["verdict"] = verdict(all);
      write_json(output_path(out_dir, "seq.json"), j);
      std::cout << "construct-seq " << verdict(all) << '\n';
    };
  });

  // construct-eus
  EusOptions eus_opt;
  bool eus_log = false;
  CLI::App* eus_cmd = add_command(app, "construct-eus", "Essentially unbounded set by dyadic kicks", out_dir);
  eus_cmd->add_option("--depth", eus_opt.depth)->check(CLI::Range(0, 64));
  eus_cmd->add_option("--c0", eus_opt.c0, "First coefficient (negative)");
  eus_cmd->add_option("--samples", eus_opt.samples, "Samples per interval")->check(CLI::Range(2, 100000));
  eus_cmd->add_option("--start-digits", eus_opt.start_digits);
  eus_cmd->add_option("--max-digits", eus_opt.max_digits);
  eus_cmd->add_flag("--log", eus_log, "Progress on stderr");
  eus_cmd->callback([&] {
    action = [&] {
      if (eus_log) eus_opt.log = [](const std::string& s) { std::cerr << s << '\n'; };
      json summary;
      summary["config"] = config_echo(eus_cmd);
      auto finish = [&](const EusBuild& b) {
        save_eus(b, output_path(out_dir, "eus.json").string());
        json checks = json::array();
        bool ok = true;
        for (const auto& c : check_invariants(b)) {
          ok = ok && c.passed;
          checks.push_back({{"name", c.name}, {"verdict", verdict(c.passed)}, {"detail", c.detail}});
        }
        summary["depth"] = b.depth();
        summary["digits"] = b.digits;
        summary["invariants"] = checks;
        summary["invariants_verdict"] = verdict(ok);
        return ok;
      };
      try {
        const EusBuild b = build_eus(eus_opt);
        summary["complete"] = true;
        const bool ok = finish(b);
        write_json(output_path(out_dir, "eus_summary.json"), summary);
        std::cout << "construct-eus depth " << b.depth() << ", invariants " << verdict(ok) << '\n';
      } catch (const EusAbort& e) {
        summary["complete"] = false;
        summary["failed_level"] = e.failed_level();
        summary["error"] = e.what();
        finish(e.partial());
        write_json(output_path(out_dir, "eus_summary.json"), summary);
        throw;
      }
    };
  });

  // verify
  std::string verify_build;
  std::vector<std::string> verify_points;
  int verify_samples = 20;
  std::uint64_t verify_k = 1u << 14;
  CLI::App* verify_cmd = add_command(app, "verify", "Boundedness checks on a saved EUS build", out_dir);
  verify_cmd->add_option("--build", verify_build, "EUS build JSON")->required()->check(CLI::ExistingFile);
  verify_cmd->add_option("t", verify_points, "Parameters (decimal); default: sampled members");
  verify_cmd->add_option("--samples", verify_samples, "Sampled members when no t is given")->check(CLI::PositiveNumber);
  verify_cmd->add_option("--K", verify_k, "Horizon")->check(CLI::Range(2ull, 1ull << 40));
  verify_cmd->callback([&] {
    action = [&] {
      const EusBuild b = load_eus(verify_build);
      PrecisionGuard guard(b.digits);
      std::vector<BigReal> ts;
      if (verify_points.empty()) ts = sample_members(b, verify_samples);
      for (const auto& s : verify_points) ts.emplace_back(s);
      json j;
      j["config"] = config_echo(verify_cmd);
      j["reports"] = json::array();
      bool all = true;
      for (const auto& t : ts) {
        const MembershipReport r = verify_membership(b, t, verify_k);
        all = all && r.stabilized && r.traces_elliptic;
        json rj = membership_to_json(r);
        rj["verdict"] = verdict(r.stabilized && r.traces_elliptic);
        j["reports"].push_back(rj);
      }
      j["verdict"] = verdict(all);
      write_json(output_path(out_dir, "verify.json"), j);
      std::cout << "verify " << verdict(all) << " over " << ts.size() << " parameters\n";
    };
  });

  // rost-window
  std::vector<double> tri_lambdas{1.0}, tri_shifts{0.0};
  double tri_t = 1.0, tri_k = 10.0;
  std::uint64_t tri_nmax = 1u << 20, tri_starts = 0;
  CLI::App* tri_cmd = add_command(app, "rost-window", "Window length for upper-triangular kicks", out_dir);
  tri_cmd->add_option("--lambdas", tri_lambdas)->delimiter(',');
  tri_cmd->add_option("--shifts", tri_shifts)->delimiter(',');
  tri_cmd->add_option("--t", tri_t);
  tri_cmd->add_option("--K", tri_k)->check(CLI::PositiveNumber);
  tri_cmd->add_option("--n-max", tri_nmax)->check(CLI::PositiveNumber);
  tri_cmd->add_option("--starts", tri_starts, "Probe starts (0: one period)");
  tri_cmd->callback([&] {
    action = [&] {
      const TriKicks tri(tri_lambdas, tri_shifts);
      const WindowResult r = rost_window(tri, tri_t, tri_k, tri_nmax, tri_starts);
      json j;
      j["config"] = config_echo(tri_cmd);
      j["t0"] = tri.t0();
      j["window"] = r.window ? json(*r.window) : json(nullptr);
      j["worst_start"] = r.worst_start;
      j["proven_bound"] = r.proven_bound;
      j["stated_bound"] = r.stated_bound;
      j["within_bound"] = verdict(r.window && static_cast<double>(*r.window) <= r.stated_bound);
      write_json(output_path(out_dir, "rost_window.json"), j);
      std::cout << "window " << (r.window ? std::to_string(*r.window) : std::string("none")) << '\n';
    };
  });

  // schrodinger
  std::vector<double> shr_c{-1.0};
  double shr_t = 1.0;
  SchrodingerOptions shr_opt;
  HorizonRule shr_rule;
  CLI::App* shr_cmd = add_command(app, "schrodinger", "Discrete Schrodinger recurrence and its matrix twin", out_dir);
  shr_cmd->add_option("--c", shr_c, "Potential c_1, c_2, .. (cycled)")->delimiter(',');
  shr_cmd->add_option("--t", shr_t);
  shr_cmd->add_option("--q0", shr_opt.q0);
  shr_cmd->add_option("--q1", shr_opt.q1);
  shr_cmd->add_option("--K", shr_opt.horizon)->check(CLI::Range(2ull, 1ull << 30));
  shr_cmd->add_option("--tol", shr_opt.tolerance, "Allowed growth of max log|q| between halves");
  shr_cmd->add_option("--M", shr_rule.threshold, "Norm threshold for the matrix verdict");
  shr_cmd->add_option("--slope-tol", shr_rule.slope_tol);
  shr_cmd->callback([&] {
    action = [&] {
      const SchrodingerResult r = schrodinger(shr_c, shr_t, shr_opt);
      shr_rule.horizon = shr_opt.horizon;
      const CellVerdict m = schrodinger_matrix_verdict(shr_c, shr_t, shr_rule);
      write_text(output_path(out_dir, "schrodinger.csv"), [&](std::ostream& o) {
        o << "k,q_mantissa,q_exp2,log_abs_q\n";
        for (std::size_t k = 0; k < r.mantissa.size(); ++k)
          o << k << ',' << fmt17(r.mantissa[k]) << ',' << r.exponent[k] << ',' << fmt17(r.log_abs(k)) << '\n';
      });
      json j;
      j["config"] = config_echo(shr_cmd);
      j["early_max"] = r.early_max;
      j["late_max"] = r.late_max;
      j["slope"] = r.slope;
      j["verdict"] = r.bounded ? "bounded" : "growing";
      j["matrix_verdict"] = m.bounded() ? "bounded" : "growing";
      j["agree"] = verdict(r.bounded == m.bounded());
      write_json(output_path(out_dir, "schrodinger.json"), j);
      std::cout << "schrodinger " << j["verdict"].get<std::string>() << ", matrix "
                << j["matrix_verdict"].get<std::string>() << '\n';
    };
  });

  // iwasawa
  std::string iw_matrix;
  CLI::App* iw_cmd = app.add_subcommand("iwasawa", "Iwasawa factors of a unimodular matrix");
  iw_cmd->add_option("matrix", iw_matrix, "Entries as \"a b; c d\"")->required();
  iw_cmd->callback([&] {
    action = [&] {
      std::string text = iw_matrix;
      for (char& ch : text)
        if (ch == ';') ch = ' ';
      const auto v = parse_real_list(text);
      if (v.size() != 4) throw std::invalid_argument("matrix needs four entries");
      const Mat2R a{v[0], v[1], v[2], v[3]};
      const IwasawaFactors f = iwasawa(a);
      json j = {{"s", f.s}, {"lambda", f.lambda}, {"alpha", f.alpha},
                {"reconstruction_error", op_norm(f.compose() - a)}};
      std::cout << j.dump(2) << '\n';
    };
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  try {
    action();
  } catch (const NumericalAbort& e) {
    std::cerr << "numerical abort: " << e.what() << '\n';
    return 2;
  } catch (const KickError& e) {
    std::cerr << "kick provider failed: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
