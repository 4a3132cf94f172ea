// Command-line front end: loads a ratings dataset, runs the filtering
// solver, and writes the result tables as CSV. Subcommands:
//   run     solve one dataset and write reputations / trust / trace
//   attack  inject adversarial raters and write robustness metrics
//   stream  replay the dataset in timestamp epochs with warm-started trust
#include "CLI11.hpp"

#include "repute/attacks.hpp"
#include "repute/engine.hpp"
#include "repute/ingest.hpp"
#include "repute/io.hpp"

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <unordered_map>
#include <vector>

namespace {

using namespace repute;

struct CommonOpts {
  std::string input;
  std::string format = "movielens";
  double scale_min = 1.0;
  double scale_max = 5.0;
  std::string trust = "linear";
  double c = 1.0;
  std::string c_file;
  double tol = 1e-9;
  int max_iter = 200;
  bool newton = false;
  double newton_trigger = 1e-4;
  std::uint64_t seed = 0;
  std::string out_dir = ".";
  std::string col_rater = "user";
  std::string col_item = "item";
  std::string col_value = "rating";
  std::string col_timestamp = "timestamp";
  std::string delimiter = ",";
};

void add_common(CLI::App* cmd, CommonOpts& o) {
  cmd->add_option("--input", o.input, "path to the ratings file")->required();
  cmd->add_option("--format", o.format, "input layout (default movielens)")
      ->check(CLI::IsMember({"movielens", "csv"}));
  cmd->add_option("--scale-min", o.scale_min, "raw value mapped to 0 (default 1)");
  cmd->add_option("--scale-max", o.scale_max, "raw value mapped to 1 (default 5)");
  cmd->add_option("--trust", o.trust, "trust function (default linear)")
      ->check(CLI::IsMember({"linear", "exp", "reciprocal"}));
  cmd->add_option("--c", o.c, "trust constant, one value for all items (default 1)");
  cmd->add_option("--c-file", o.c_file,
                  "per-item trust constants: CSV with header item_id,c covering every item");
  cmd->add_option("--tol", o.tol, "convergence threshold on successive iterates (default 1e-9)");
  cmd->add_option("--max-iter", o.max_iter, "iteration cap (default 200)");
  cmd->add_flag("--newton", o.newton, "finish with Newton steps once the step norm is small");
  cmd->add_option("--newton-trigger", o.newton_trigger,
                  "step norm that hands over to Newton (default 1e-4)");
  cmd->add_option("--seed", o.seed, "random seed (attack generation)");
  cmd->add_option("--out-dir", o.out_dir, "directory for output CSVs (default .)");
  cmd->add_option("--col-rater", o.col_rater, "CSV column holding rater ids (default user)");
  cmd->add_option("--col-item", o.col_item, "CSV column holding item ids (default item)");
  cmd->add_option("--col-value", o.col_value, "CSV column holding ratings (default rating)");
  cmd->add_option("--col-timestamp", o.col_timestamp,
                  "CSV column holding timestamps (default timestamp)");
  cmd->add_option("--delimiter", o.delimiter, "CSV field delimiter (default ,)");
}

DatasetDescriptor make_descriptor(const CommonOpts& o) {
  DatasetDescriptor d;
  d.format = o.format == "csv" ? DatasetFormat::kCsv : DatasetFormat::kMovieLensTab;
  d.scale = {o.scale_min, o.scale_max};
  d.rater_column = o.col_rater;
  d.item_column = o.col_item;
  d.value_column = o.col_value;
  d.timestamp_column = o.col_timestamp;
  if (o.delimiter.size() != 1)
    throw ValidationError("delimiter must be a single character");
  d.delimiter = o.delimiter[0];
  return d;
}

TrustKind parse_trust_kind(const std::string& name) {
  if (name == "linear") return TrustKind::kLinear;
  if (name == "exp") return TrustKind::kExponential;
  return TrustKind::kReciprocal;
}

/// Per-item constants from a two-column CSV, aligned to the given item order.
VectorX<double> load_item_constants(const std::string& path,
                                    const std::vector<std::string>& item_ids) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open constants file '" + path + "'");
  std::unordered_map<std::string, double> by_id;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line_no == 1) continue;  // header
    const auto comma = line.find(',');
    if (line.find_first_not_of(" \t\r\n") == std::string::npos) continue;
    if (comma == std::string::npos)
      throw ValidationError("constants file line " + std::to_string(line_no) +
                            ": expected item_id,c");
    const std::string id = line.substr(0, comma);
    try {
      if (!by_id.emplace(id, std::stod(line.substr(comma + 1))).second)
        throw ValidationError("constants file: duplicate item '" + id + "'");
    } catch (const std::invalid_argument&) {
      throw ValidationError("constants file line " + std::to_string(line_no) +
                            ": cannot parse constant");
    }
  }
  VectorX<double> c(static_cast<Eigen::Index>(item_ids.size()));
  for (std::size_t j = 0; j < item_ids.size(); ++j) {
    const auto it = by_id.find(item_ids[j]);
    if (it == by_id.end())
      throw ValidationError("constants file gives no value for item '" + item_ids[j] + "'");
    c[static_cast<Eigen::Index>(j)] = it->second;
  }
  return c;
}

SolveConfigd make_config(const CommonOpts& o, const std::vector<std::string>& item_ids) {
  SolveConfigd config;
  config.trust.kind = parse_trust_kind(o.trust);
  if (!o.c_file.empty())
    config.trust.per_item_c = load_item_constants(o.c_file, item_ids);
  else
    config.trust.c = o.c;
  config.tol = o.tol;
  config.max_iterations = o.max_iter;
  config.newton = o.newton;
  config.newton_trigger = o.newton_trigger;
  if (config.trust.kind == TrustKind::kReciprocal) {
    const bool zero_c = config.trust.uniform()
                            ? config.trust.c == 0.0
                            : (config.trust.per_item_c.array() == 0.0).any();
    if (zero_c)
      std::cerr << "note: reciprocal trust with c = 0: the fixed point need not be unique\n";
  }
  return config;
}

std::ofstream open_output(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("cannot write '" + path.string() + "'");
  return out;
}

std::filesystem::path prepare_out_dir(const CommonOpts& o) {
  const std::filesystem::path dir(o.out_dir);
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw ValidationError("cannot create output directory '" + o.out_dir + "'");
  return dir;
}

int cmd_run(const CommonOpts& o) {
  const Datasetd data = load_file(o.input, make_descriptor(o));
  const SolveConfigd config = make_config(o, data.item_ids);
  const std::filesystem::path dir = prepare_out_dir(o);

  const auto start = std::chrono::steady_clock::now();
  const ReputationReportd report = solve(data.ratings, config);
  const auto stop = std::chrono::steady_clock::now();
  const double ms = std::chrono::duration<double, std::milli>(stop - start).count();

  {
    auto out = open_output(dir / "reputations.csv");
    write_reputations_csv(out, report, data.item_ids, data.ratings.scale());
  }
  {
    auto out = open_output(dir / "trust.csv");
    write_trust_csv(out, report, data.rater_ids);
  }
  {
    auto out = open_output(dir / "trace.csv");
    write_trace_csv(out, report);
  }
  {
    auto out = open_output(dir / "raters.csv");
    write_dictionary_csv(out, data.rater_ids);
  }
  {
    auto out = open_output(dir / "items.csv");
    write_dictionary_csv(out, data.item_ids);
  }

  std::cout << "raters=" << data.ratings.n_raters() << " items=" << data.ratings.n_items()
            << " entries=" << data.ratings.n_entries() << "\n";
  std::cout << "iterations=" << report.iterations
            << " converged=" << (report.converged ? "yes" : "no") << " runtime_ms=" << ms
            << "\n";
  std::cout << "outputs: " << (dir / "reputations.csv").string() << ", trust.csv, trace.csv, "
            << "raters.csv, items.csv\n";
  if (!report.converged) {
    std::cerr << "error: did not converge within " << config.max_iterations
              << " iterations (outputs written)\n";
    return 2;
  }
  return 0;
}

struct AttackOpts {
  std::string type;
  int count = 0;
  std::string items_per_attacker = "match";
  std::string preferred_items;
  std::string scenario_file;
  int bins = 50;
};

AttackScenario make_scenario(const CommonOpts& o, const AttackOpts& a) {
  if (!a.scenario_file.empty()) {
    std::ifstream in(a.scenario_file, std::ios::binary);
    if (!in) throw ValidationError("cannot open scenario file '" + a.scenario_file + "'");
    std::ostringstream text;
    text << in.rdbuf();
    return parse_scenario(text.str());
  }
  if (a.type.empty())
    throw ValidationError("attack needs --type (or --scenario FILE)");
  AttackScenario scenario;
  scenario.kind = a.type == "spammer" ? AttackKind::kSpammer : AttackKind::kRandomRater;
  scenario.count = a.count;
  try {
    if (a.items_per_attacker == "match")
      scenario.items_per_attacker.reset();
    else
      scenario.items_per_attacker = std::stoi(a.items_per_attacker);
  } catch (const std::exception&) {
    throw ValidationError("--items-per-attacker must be a count or 'match'");
  }
  scenario.seed = o.seed;
  if (!a.preferred_items.empty()) {
    scenario.preferred = PreferredRule::kFixedList;
    std::istringstream in(a.preferred_items);
    std::string tok;
    while (std::getline(in, tok, ',')) {
      try {
        scenario.preferred_items.push_back(std::stoi(tok));
      } catch (const std::exception&) {
        throw ValidationError("--preferred-items must be comma-separated item indices");
      }
    }
  }
  return scenario;
}

int cmd_attack(const CommonOpts& o, const AttackOpts& a) {
  const Datasetd data = load_file(o.input, make_descriptor(o));
  const SolveConfigd config = make_config(o, data.item_ids);
  const AttackScenario scenario = make_scenario(o, a);
  const std::filesystem::path dir = prepare_out_dir(o);

  const ReputationReportd base_report = solve(data.ratings, config);
  const VectorX<double> base_average = average_baseline(data.ratings);

  const SparseRatingsd attackers = generate_attackers(data.ratings, scenario);
  const MergeResult<double> merged = merge(data.ratings, attackers);
  const TrustSeparation<double> separation =
      trust_separation_trace(merged.ratings, merged.labels, config, a.bins);
  const VectorX<double> merged_average = average_baseline(merged.ratings);

  const PerturbationMetrics<double> metrics = perturbation(
      l1_difference(base_report.reputation, separation.report.reputation,
                    data.ratings.scale()),
      l1_difference(base_average, merged_average, data.ratings.scale()));

  {
    auto out = open_output(dir / "perturbation.csv");
    write_perturbation_csv(out, metrics);
  }
  {
    auto out = open_output(dir / "separation.csv");
    write_separation_csv(out, separation);
  }
  {
    auto out = open_output(dir / "scenario.cfg");
    out << serialize_scenario(scenario);
  }

  std::cout << "attackers=" << scenario.count << " merged_raters=" << merged.ratings.n_raters()
            << " entries=" << merged.ratings.n_entries() << "\n";
  std::cout << "l1_filtered=" << format_full(metrics.filtered.normalized)
            << " l1_average=" << format_full(metrics.average.normalized)
            << " ratio=" << format_full(metrics.ratio) << "\n";
  const SeparationSnapshot<double>& last = separation.snapshots.back();
  if (last.separation)
    std::cout << "separation_converged=" << format_full(*last.separation) << "\n";
  std::cout << "outputs: " << (dir / "perturbation.csv").string()
            << ", separation.csv, scenario.cfg\n";
  if (!base_report.converged || !separation.report.converged) {
    std::cerr << "error: a solve did not converge within " << config.max_iterations
              << " iterations (outputs written)\n";
    return 2;
  }
  return 0;
}

int cmd_stream(const CommonOpts& o, int epochs, int steps) {
  const Datasetd data = load_file(o.input, make_descriptor(o));
  const EpochSplit<double> split = split_epochs(data, epochs);
  const std::filesystem::path dir = prepare_out_dir(o);

  std::vector<StreamEpochRow> rows;
  TrustStated carried;
  const SparseRatingsd* previous = nullptr;
  for (std::size_t k = 0; k < split.epochs.size(); ++k) {
    const SparseRatingsd& ratings = split.epochs[k];
    std::vector<std::string> item_ids(split.item_ids.begin(),
                                      split.item_ids.begin() + ratings.n_items());
    SolveConfigd config = make_config(o, item_ids);

    StreamEpochd epoch;
    epoch.ratings = ratings;
    epoch.warm_trust =
        previous ? reconcile_trust(*previous, carried, ratings) : init_trust(ratings);
    epoch.steps = steps;
    const ReputationReportd report = stream_update(epoch, config);

    const ReputationReportd full = solve(ratings, config);

    StreamEpochRow row;
    row.epoch = static_cast<int>(k) + 1;
    row.n_entries = ratings.n_entries();
    row.steps_applied = report.iterations;
    row.step_norm_after = report.trace.back().step_norm;
    row.drift = (report.reputation - full.reputation).lpNorm<Eigen::Infinity>();
    rows.push_back(row);

    carried = report.final_trust;
    previous = &ratings;
  }

  {
    auto out = open_output(dir / "stream.csv");
    write_stream_csv(out, rows);
  }
  for (const StreamEpochRow& row : rows)
    std::cout << "epoch=" << row.epoch << " entries=" << row.n_entries
              << " steps=" << row.steps_applied
              << " step_norm=" << format_full(row.step_norm_after)
              << " drift=" << format_full(row.drift) << "\n";
  std::cout << "outputs: " << (dir / "stream.csv").string() << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Iterative-filtering reputation engine"};
  app.require_subcommand(1);

  CommonOpts run_opts, attack_opts_common, stream_opts;
  AttackOpts attack_opts;
  int epochs = 10, steps = 3;

  CLI::App* run = app.add_subcommand("run", "solve one dataset and write result tables");
  add_common(run, run_opts);

  CLI::App* attack =
      app.add_subcommand("attack", "inject adversarial raters and measure the damage");
  add_common(attack, attack_opts_common);
  attack->add_option("--type", attack_opts.type, "attacker kind")
      ->check(CLI::IsMember({"random", "spammer"}));
  attack->add_option("--count", attack_opts.count, "number of injected raters");
  attack->add_option("--items-per-attacker", attack_opts.items_per_attacker,
                     "items each attacker rates: a count, or 'match' to draw from the "
                     "base raters' distribution (default match)");
  attack->add_option("--preferred-items", attack_opts.preferred_items,
                     "comma-separated dense item indices spammers prefer, round-robin "
                     "(default: uniform random per spammer)");
  attack->add_option("--scenario", attack_opts.scenario_file,
                     "read the scenario from a key=value file instead of flags");
  attack->add_option("--bins", attack_opts.bins, "histogram bins (default 50)");

  CLI::App* stream =
      app.add_subcommand("stream", "replay timestamp epochs with warm-started trust");
  add_common(stream, stream_opts);
  stream->add_option("--epochs", epochs, "number of cumulative epochs (default 10)");
  stream->add_option("--steps", steps, "averaging passes per epoch (default 3)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (run->parsed()) return cmd_run(run_opts);
    if (attack->parsed()) return cmd_attack(attack_opts_common, attack_opts);
    return cmd_stream(stream_opts, epochs, steps);
  } catch (const repute::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
