// Command-line surface over the distillation library: totient and group-order
// tables, protocol performance coefficients, fidelity sweeps, yield traces,
// Monte Carlo volume estimates, and a round-trip verifier for the emitted
// files. Exit codes: 0 success, 2 invalid arguments, 3 resource caps,
// 4 failed numerical-consistency checks.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "qudistill/montecarlo.hpp"
#include "qudistill/protocol.hpp"
#include "qudistill/ring.hpp"
#include "qudistill/states.hpp"
#include "qudistill/symplectic.hpp"
#include "qudistill/types.hpp"

namespace {

constexpr const char* kVersion = "1.0.0";

using nlohmann::json;
using qudistill::IMat;
using qudistill::states::BellDiagonalState;
namespace protocol = qudistill::protocol;
namespace montecarlo = qudistill::montecarlo;

struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<json>> rows;
  std::vector<std::pair<std::string, json>> meta;  // insertion order preserved

  void add_row(std::initializer_list<json> cells) { rows.emplace_back(cells); }
};

struct Cli {
  std::uint64_t seed = 12345;
  int jobs = 0;
  std::string format = "csv";
  std::string out_path;
  std::string command;
  std::string criteria = "exact";
  Table table;
};

std::string cell_text(const json& value) {
  return value.is_string() ? value.get<std::string>() : value.dump();
}

void write_output(const Cli& cli, long long wall_ms) {
  std::vector<std::pair<std::string, json>> meta;
  meta.emplace_back("version", kVersion);
  meta.emplace_back("command", cli.command);
  meta.emplace_back("seed", cli.seed);
  meta.emplace_back("criteria", cli.criteria);
  meta.insert(meta.end(), cli.table.meta.begin(), cli.table.meta.end());
  meta.emplace_back("wall_ms", wall_ms);

  std::ostringstream body;
  if (cli.format == "json") {
    json meta_obj = json::object();
    for (const auto& [key, value] : meta) meta_obj[key] = value;
    json rows = json::array();
    for (const auto& row : cli.table.rows) {
      json obj = json::object();
      for (std::size_t c = 0; c < cli.table.columns.size(); ++c) {
        obj[cli.table.columns[c]] = row[c];
      }
      rows.push_back(std::move(obj));
    }
    body << json{{"meta", meta_obj}, {"rows", rows}}.dump(2) << '\n';
  } else {
    for (const auto& [key, value] : meta) body << "# " << key << '=' << cell_text(value) << '\n';
    for (std::size_t c = 0; c < cli.table.columns.size(); ++c) {
      body << (c ? "," : "") << cli.table.columns[c];
    }
    body << '\n';
    for (const auto& row : cli.table.rows) {
      for (std::size_t c = 0; c < row.size(); ++c) body << (c ? "," : "") << cell_text(row[c]);
      body << '\n';
    }
  }

  if (cli.out_path.empty()) {
    std::cout << body.str();
  } else {
    std::ofstream out(cli.out_path);
    if (!out) throw std::invalid_argument("cannot open output path: " + cli.out_path);
    out << body.str();
  }
}

// "a:b:step" -> inclusive grid; a bare number -> a single point.
std::vector<double> parse_grid(const std::string& text) {
  std::vector<double> parts;
  std::stringstream stream(text);
  std::string piece;
  while (std::getline(stream, piece, ':')) {
    std::size_t used = 0;
    double value = 0;
    try {
      value = std::stod(piece, &used);
    } catch (const std::exception&) {
      throw std::invalid_argument("grid component is not a number: " + piece);
    }
    if (used != piece.size()) throw std::invalid_argument("grid component is not a number: " + piece);
    parts.push_back(value);
  }
  if (parts.size() == 1) return parts;
  if (parts.size() != 3) throw std::invalid_argument("grid must be F or lo:hi:step");
  const double lo = parts[0], hi = parts[1], step = parts[2];
  if (step <= 0 || hi < lo) throw std::invalid_argument("grid needs lo <= hi and step > 0");
  std::vector<double> grid;
  for (double f = lo; f <= hi + 1e-12; f += step) grid.push_back(std::min(f, hi));
  return grid;
}

void run_totient(Cli& cli, int n_max, std::int64_t d_max, bool verify) {
  if (n_max < 1 || d_max < 2) throw std::invalid_argument("need nmax >= 1 and dmax >= 2");
  cli.table.columns = {"n", "D", "phi"};
  for (int n = 1; n <= n_max; ++n) {
    for (std::int64_t d = 2; d <= d_max; ++d) {
      cli.table.add_row({n, d, qudistill::ring::totient(n, d)});
    }
  }
  if (verify) {
    // The gcd classes tile the module: sum of totients over divisors is D^n.
    for (int n = 1; n <= n_max; ++n) {
      for (std::int64_t d = 2; d <= d_max; ++d) {
        std::uint64_t total = 0;
        for (const std::int64_t div : qudistill::ring::divisors(d)) {
          total += qudistill::ring::totient(n, div);
        }
        std::uint64_t power = 1;
        for (int i = 0; i < n; ++i) power *= static_cast<std::uint64_t>(d);
        if (total != power) {
          throw qudistill::numerical_error("divisor-sum identity failed at n=" +
                                           std::to_string(n) + " D=" + std::to_string(d));
        }
      }
    }
    cli.table.meta.emplace_back("verify", "pass");
  }
}

void run_group(Cli& cli, std::int64_t d, int n, const std::string& mode, std::uint64_t cap) {
  if (d < 2 || n < 1) throw std::invalid_argument("need D >= 2 and n >= 1");
  if (mode == "order") {
    cli.table.columns = {"D", "n", "order"};
    cli.table.add_row({d, n, qudistill::symplectic::group_order(d, n)});
    return;
  }
  if (mode == "enumerate") {
    const auto elements = qudistill::symplectic::enumerate(d, n, cap);
    cli.table.columns = {"index"};
    for (int r = 0; r < 2 * n; ++r) {
      for (int c = 0; c < 2 * n; ++c) {
        cli.table.columns.push_back("m" + std::to_string(r) + "_" + std::to_string(c));
      }
    }
    for (std::size_t i = 0; i < elements.size(); ++i) {
      std::vector<json> row = {i};
      for (int r = 0; r < 2 * n; ++r) {
        for (int c = 0; c < 2 * n; ++c) row.push_back(elements[i](r, c));
      }
      cli.table.rows.push_back(std::move(row));
    }
    return;
  }
  // verify: the closed-form order against an exhaustive enumeration.
  const std::uint64_t formula = qudistill::symplectic::group_order(d, n);
  const std::uint64_t counted = qudistill::symplectic::enumerate(d, n, cap).size();
  cli.table.columns = {"D", "n", "order_formula", "order_enumerated", "match"};
  cli.table.add_row({d, n, formula, counted, formula == counted});
  if (formula != counted) {
    throw qudistill::numerical_error("group order formula disagrees with enumeration");
  }
}

void run_eta(Cli& cli, std::int64_t d_max) {
  if (d_max < 2) throw std::invalid_argument("need dmax >= 2");
  cli.table.columns = {"D", "n", "protocol", "F1", "P0", "eta"};
  for (std::int64_t d = 2; d <= d_max; ++d) {
    const std::vector<std::string> names = {"n2", d % 2 == 1 ? "n3-odd" : "n3-even", "n4"};
    for (const auto& name : names) {
      const auto step = protocol::builtin_step(name, d);
      const auto report = protocol::performance(protocol::chi_from_vm(step));
      cli.table.add_row({d, step.n, name, report.f1, report.p0, report.eta});
    }
  }
}

void run_sweep(Cli& cli, const std::string& policy_name, std::int64_t d, double f0, int steps,
               bool bisection) {
  const protocol::Policy policy = protocol::policy_from_name(policy_name);
  cli.table.meta.emplace_back("policy", policy_name);
  cli.table.meta.emplace_back("D", d);
  if (bisection) {
    // Locate the convergence threshold of the policy's basin on isotropic
    // inputs, assuming distillability is monotone in the start fidelity.
    double lo = 1.0 / static_cast<double>(d * d) + 1e-9;
    double hi = 1.0;
    if (protocol::distillable(policy, qudistill::states::isotropic(d, lo)) ||
        !protocol::distillable(policy, qudistill::states::isotropic(d, hi))) {
      throw std::invalid_argument("bisection bracket does not straddle the threshold");
    }
    for (int iter = 0; iter < 60 && hi - lo > 1e-10; ++iter) {
      const double mid = 0.5 * (lo + hi);
      (protocol::distillable(policy, qudistill::states::isotropic(d, mid)) ? hi : lo) = mid;
    }
    cli.table.columns = {"policy", "D", "threshold", "lo", "hi"};
    cli.table.add_row({policy_name, d, 0.5 * (lo + hi), lo, hi});
    return;
  }
  if (steps < 1) throw std::invalid_argument("need steps >= 1");
  cli.table.columns = {"step", "F", "P"};
  protocol::PolicyIterator iterator(policy, qudistill::states::isotropic(d, f0));
  cli.table.add_row({0, iterator.fidelity(), 1.0});
  for (int k = 1; k <= steps; ++k) {
    double success = 0.0;
    try {
      success = iterator.advance();
    } catch (const qudistill::numerical_error&) {
      cli.table.meta.emplace_back("terminated", "vanishing-success");
      break;
    }
    cli.table.add_row({k, iterator.fidelity(), success});
  }
}

void run_yield(Cli& cli, const std::string& policy_name, std::int64_t d,
               const std::string& grid_text, double target, int max_steps) {
  const protocol::Policy policy = protocol::policy_from_name(policy_name);
  cli.table.meta.emplace_back("policy", policy_name);
  cli.table.meta.emplace_back("D", d);
  cli.criteria = "target=" + std::to_string(target) + ";max_steps=" + std::to_string(max_steps);
  cli.table.columns = {"F0", "steps", "yield", "success", "reached", "final_F"};
  for (const double f0 : parse_grid(grid_text)) {
    const auto trace =
        protocol::yield_trace(policy, qudistill::states::isotropic(d, f0), target, max_steps);
    double success = 1.0;
    for (std::size_t k = 1; k < trace.records.size(); ++k) success *= trace.records[k].success;
    const int steps = static_cast<int>(trace.records.size()) - 1;
    cli.table.add_row({f0, steps, trace.reached_target ? trace.records.back().yield : 0.0,
                       trace.reached_target ? success : 0.0, trace.reached_target,
                       trace.records.back().fidelity});
  }
}

void run_volume(Cli& cli, const std::string& mode, std::int64_t d, const std::string& grid_text,
                std::int64_t samples, const std::string& policy_name) {
  const protocol::Policy policy = protocol::policy_from_name(policy_name);
  cli.table.meta.emplace_back("policy", policy_name);
  cli.table.meta.emplace_back("D", d);
  const protocol::DistillCriteria criteria;
  cli.criteria = "target=" + std::to_string(criteria.target) +
                 ";max_steps=" + std::to_string(criteria.max_steps) +
                 ";stall_window=" + std::to_string(criteria.stall_window);
  cli.table.columns = {"F", "fraction", "stderr", "N", "set"};
  const auto add = [&](double f, const montecarlo::VolumeEstimate& est, const char* set) {
    cli.table.add_row({f, est.fraction, est.std_error, est.samples_accepted, set});
  };
  for (const double f : parse_grid(grid_text)) {
    if (mode == "distill") {
      add(f, montecarlo::volume_distilled(d, f, policy, samples, cli.seed, cli.jobs), "distill");
    } else if (mode == "nppt") {
      add(f, montecarlo::volume_nppt(d, f, samples, cli.seed, cli.jobs), "nppt");
    } else {
      const auto paired = montecarlo::volume_both(d, f, policy, samples, cli.seed, cli.jobs);
      add(f, paired.distilled, "distill");
      add(f, paired.nppt, "nppt");
    }
  }
}

// Round-trip loader for files produced by the other commands.
void run_verify(Cli& cli, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open input path: " + path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  const std::string text = buffer.str();

  std::string command = "?";
  std::size_t meta_count = 0, row_count = 0, column_count = 0;
  const std::size_t first_mark = text.find_first_not_of(" \t\r\n");
  if (first_mark != std::string::npos && text[first_mark] == '{') {
    json doc;
    try {
      doc = json::parse(text);
    } catch (const json::exception& e) {
      throw std::invalid_argument(std::string("not a valid emitted file: ") + e.what());
    }
    if (!doc.contains("meta") || !doc.contains("rows") || !doc["rows"].is_array()) {
      throw std::invalid_argument("missing meta or rows");
    }
    command = doc["meta"].value("command", "?");
    meta_count = doc["meta"].size();
    row_count = doc["rows"].size();
    for (const auto& row : doc["rows"]) {
      if (!row.is_object() || (row_count && row.size() != doc["rows"][0].size())) {
        throw std::invalid_argument("rows are not uniform objects");
      }
    }
    column_count = row_count ? doc["rows"][0].size() : 0;
  } else {
    std::stringstream lines(text);
    std::string line;
    bool have_header = false;
    while (std::getline(lines, line)) {
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (line.empty()) continue;
      if (line.rfind("# ", 0) == 0) {
        if (have_header) throw std::invalid_argument("metadata after the header row");
        const std::size_t eq = line.find('=');
        if (eq == std::string::npos) throw std::invalid_argument("metadata line without '='");
        if (line.substr(2, eq - 2) == "command") command = line.substr(eq + 1);
        ++meta_count;
        continue;
      }
      const std::size_t cells = static_cast<std::size_t>(std::count(line.begin(), line.end(), ',')) + 1;
      if (!have_header) {
        have_header = true;
        column_count = cells;
      } else {
        if (cells != column_count) throw std::invalid_argument("ragged row in table body");
        ++row_count;
      }
    }
    if (!have_header || meta_count == 0) {
      throw std::invalid_argument("not a valid emitted file: missing metadata or header");
    }
  }
  cli.table.columns = {"file", "command", "meta_entries", "columns", "rows", "ok"};
  cli.table.add_row({path, command, meta_count, column_count, row_count, true});
}

// Splices "--key=value" tokens from a JSON config file right after the
// subcommand name, so explicitly typed flags (which come later) win.
std::vector<std::string> expand_config(int argc, char** argv,
                                       const std::set<std::string>& subcommands) {
  std::vector<std::string> tokens(argv + 1, argv + argc);
  std::string config_path;
  for (std::size_t i = 0; i < tokens.size();) {
    if (tokens[i] == "--config") {
      if (i + 1 >= tokens.size()) throw std::invalid_argument("--config needs a file path");
      config_path = tokens[i + 1];
      tokens.erase(tokens.begin() + static_cast<std::ptrdiff_t>(i),
                   tokens.begin() + static_cast<std::ptrdiff_t>(i) + 2);
    } else if (tokens[i].rfind("--config=", 0) == 0) {
      config_path = tokens[i].substr(9);
      tokens.erase(tokens.begin() + static_cast<std::ptrdiff_t>(i));
    } else {
      ++i;
    }
  }
  if (config_path.empty()) return tokens;

  std::ifstream in(config_path);
  if (!in) throw std::invalid_argument("cannot open config file: " + config_path);
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("config is not valid JSON: ") + e.what());
  }
  if (!doc.is_object()) throw std::invalid_argument("config must be a JSON object");

  auto at = std::find_if(tokens.begin(), tokens.end(),
                         [&](const std::string& t) { return subcommands.count(t) > 0; });
  if (at == tokens.end()) throw std::invalid_argument("--config needs a subcommand to apply to");
  ++at;
  std::vector<std::string> spliced;
  for (const auto& [key, value] : doc.items()) {
    const auto one = [&](const json& v) {
      spliced.push_back("--" + key + "=" + cell_text(v));
    };
    if (value.is_array()) {
      for (const auto& v : value) one(v);
    } else {
      one(value);
    }
  }
  tokens.insert(at, spliced.begin(), spliced.end());
  return tokens;
}

}  // namespace

int main(int argc, char** argv) {
  Cli cli;
  CLI::App app{"Entanglement distillation by symplectic recursion: tables, sweeps, and volumes",
               "qudistill"};
  app.require_subcommand(1);
  app.fallthrough();

  const auto take_last = [](CLI::Option* option) {
    return option->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  };
  take_last(app.add_option("--seed", cli.seed, "Base seed for every stochastic command"))
      ->capture_default_str();
  take_last(app.add_option("--jobs", cli.jobs, "Worker threads (0 = hardware count)"))
      ->capture_default_str();
  take_last(app.add_option("--format", cli.format, "Output format")
                ->check(CLI::IsMember({"csv", "json"})))
      ->capture_default_str();
  take_last(app.add_option("--out", cli.out_path, "Write output to this path instead of stdout"));
  std::string config_path_for_help;  // consumed before parsing; listed for --help only
  app.add_option("--config", config_path_for_help,
                 "JSON file whose keys mirror the subcommand's flags (typed flags win)");

  // totient
  auto* totient = app.add_subcommand("totient", "Primitive-vector counts over Z_D^n");
  int totient_nmax = 3;
  std::int64_t totient_dmax = 6;
  bool totient_verify = false;
  take_last(totient->add_option("--nmax", totient_nmax, "Largest vector length"))
      ->capture_default_str();
  take_last(totient->add_option("--dmax", totient_dmax, "Largest modulus"))
      ->capture_default_str();
  totient->add_flag("--verify", totient_verify, "Check the divisor-sum identity on every row");
  totient->callback([&] { run_totient(cli, totient_nmax, totient_dmax, totient_verify); });

  // group
  auto* group = app.add_subcommand("group", "Order and enumeration of the relabeling group");
  std::int64_t group_d = 2;
  int group_n = 1;
  std::string group_mode = "order";
  std::uint64_t group_cap = qudistill::kDefaultGroupCap;
  take_last(group->add_option("--D", group_d, "Modulus")->required());
  take_last(group->add_option("--n", group_n, "Pair count")->required());
  take_last(group->add_option("--mode", group_mode, "order | enumerate | verify")
                ->check(CLI::IsMember({"order", "enumerate", "verify"})))
      ->capture_default_str();
  take_last(group->add_option("--cap", group_cap, "Enumeration size cap"))->capture_default_str();
  group->callback([&] { run_group(cli, group_d, group_n, group_mode, group_cap); });

  // eta
  auto* eta = app.add_subcommand("eta", "Performance coefficients of the named protocols");
  std::int64_t eta_dmax = 6;
  take_last(eta->add_option("--dmax", eta_dmax, "Largest modulus"))->capture_default_str();
  eta->callback([&] { run_eta(cli, eta_dmax); });

  // sweep
  auto* sweep = app.add_subcommand("sweep", "Fidelity trajectory of one policy");
  std::string sweep_policy;
  std::int64_t sweep_d = 2;
  double sweep_f0 = 0.75;
  int sweep_steps = 30;
  bool sweep_bisection = false;
  take_last(sweep->add_option("--protocol", sweep_policy, "Policy name")
                ->check(CLI::IsMember(protocol::policy_names()))
                ->required());
  take_last(sweep->add_option("--D", sweep_d, "Modulus")->required());
  take_last(sweep->add_option("--F0", sweep_f0, "Start fidelity"))->capture_default_str();
  take_last(sweep->add_option("--steps", sweep_steps, "Rounds to iterate"))->capture_default_str();
  sweep->add_flag("--bisection", sweep_bisection,
                  "Locate the convergence threshold instead of sweeping");
  sweep->callback(
      [&] { run_sweep(cli, sweep_policy, sweep_d, sweep_f0, sweep_steps, sweep_bisection); });

  // yield
  auto* yield = app.add_subcommand("yield", "Pairs kept per pair consumed to reach a target");
  std::string yield_policy;
  std::int64_t yield_d = 2;
  std::string yield_grid;
  double yield_target = 0.99;
  int yield_max_steps = 200;
  take_last(yield->add_option("--protocol", yield_policy, "Policy name")
                ->check(CLI::IsMember(protocol::policy_names()))
                ->required());
  take_last(yield->add_option("--D", yield_d, "Modulus")->required());
  auto* yield_grid_opt =
      take_last(yield->add_option("--grid", yield_grid, "Start fidelities, lo:hi:step"));
  auto* yield_f0_opt =
      take_last(yield->add_option("--F0", yield_grid, "Single start fidelity"));
  yield_grid_opt->excludes(yield_f0_opt);
  take_last(yield->add_option("--target", yield_target, "Fidelity to reach"))
      ->capture_default_str();
  take_last(yield->add_option("--max-steps", yield_max_steps, "Round budget"))
      ->capture_default_str();
  yield->callback([&] {
    if (yield_grid.empty()) throw CLI::RequiredError("--grid or --F0");
    run_yield(cli, yield_policy, yield_d, yield_grid, yield_target, yield_max_steps);
  });

  // volume
  auto* volume = app.add_subcommand("volume", "Monte Carlo volume of distilled / witnessed sets");
  std::string volume_mode = "distill";
  std::int64_t volume_d = 2;
  std::string volume_grid;
  std::int64_t volume_samples = 500;
  std::string volume_policy = "qpa";
  take_last(volume->add_option("--mode", volume_mode, "distill | nppt | both")
                ->check(CLI::IsMember({"distill", "nppt", "both"})))
      ->capture_default_str();
  take_last(volume->add_option("--D", volume_d, "Modulus")->required());
  auto* volume_grid_opt =
      take_last(volume->add_option("--grid", volume_grid, "Fidelities, lo:hi:step"));
  auto* volume_f0_opt =
      take_last(volume->add_option("--F0", volume_grid, "Single fidelity"));
  volume_grid_opt->excludes(volume_f0_opt);
  take_last(volume->add_option("--samples", volume_samples, "Samples per grid point"))
      ->capture_default_str();
  take_last(volume->add_option("--policy", volume_policy, "Distillation policy")
                ->check(CLI::IsMember(protocol::policy_names())))
      ->capture_default_str();
  volume->callback([&] {
    if (volume_grid.empty()) throw CLI::RequiredError("--grid or --F0");
    run_volume(cli, volume_mode, volume_d, volume_grid, volume_samples, volume_policy);
  });

  // verify
  auto* verify = app.add_subcommand("verify", "Round-trip parse a file emitted by this tool");
  std::string verify_in;
  take_last(verify->add_option("--in", verify_in, "File to check")->required());
  verify->callback([&] { run_verify(cli, verify_in); });

  const std::set<std::string> names = {"totient", "group", "eta", "sweep",
                                       "yield",   "volume", "verify"};
  const auto started = std::chrono::steady_clock::now();
  try {
    std::vector<std::string> tokens = expand_config(argc, argv, names);
    std::reverse(tokens.begin(), tokens.end());
    app.parse(std::move(tokens));
    for (const auto* sub : app.get_subcommands()) cli.command = sub->get_name();
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  } catch (const qudistill::numerical_error& e) {
    std::cerr << "numerical-consistency failure: " << e.what() << '\n';
    return 4;
  } catch (const qudistill::resource_limit_error& e) {
    std::cerr << "resource cap: " << e.what() << '\n';
    return 3;
  } catch (const std::overflow_error& e) {
    std::cerr << "resource cap: " << e.what() << '\n';
    return 3;
  } catch (const std::invalid_argument& e) {
    std::cerr << "invalid arguments: " << e.what() << '\n';
    return 2;
  } catch (const std::domain_error& e) {
    std::cerr << "invalid arguments: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  const auto wall_ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                           std::chrono::steady_clock::now() - started)
                           .count();
  write_output(cli, wall_ms);
  return 0;
}
