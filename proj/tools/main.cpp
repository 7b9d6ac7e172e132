#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "bitcurve/checkpoint.hpp"
#include "bitcurve/curve.hpp"
#include "bitcurve/errors.hpp"
#include "bitcurve/history.hpp"
#include "bitcurve/netspec.hpp"
#include "bitcurve/objective.hpp"
#include "bitcurve/pool.hpp"
#include "bitcurve/qtns.hpp"
#include "bitcurve/quant.hpp"
#include "bitcurve/ranking.hpp"
#include "bitcurve/search.hpp"
#include "config.hpp"
#include "json.hpp"

namespace fs = std::filesystem;
using namespace bitcurve;

namespace {

std::string fmt(double value, const char* format = "%.9g") {
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  if (std::isnan(value)) return "nan";
  char buffer[64];
  std::snprintf(buffer, sizeof(buffer), format, value);
  return buffer;
}

std::string weights_field(const std::vector<double>& weights) {
  std::string out;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    if (i) out += ';';
    out += fmt(weights[i]);
  }
  return out;
}

std::vector<double> parse_weights(const std::string& text) {
  std::vector<double> weights;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t comma = text.find(',', pos);
    if (comma == std::string::npos) comma = text.size();
    const std::string item = text.substr(pos, comma - pos);
    if (item.empty()) throw ConfigError("empty weight in \"" + text + "\"");
    weights.push_back(std::stod(item));
    pos = comma + 1;
    if (comma == text.size()) break;
  }
  return weights;
}

std::string resolve_output_dir(const cli::RunConfig& config, const std::string& flag_out) {
  if (!flag_out.empty()) return flag_out;
  if (const char* env = std::getenv("BITCURVE_OUT"); env && *env) return env;
  return config.output_dir;
}

std::unique_ptr<objective::Objective> make_objective(const cli::RunConfig& config,
                                                     const net::NetworkSpec& spec) {
  if (config.objective_kind == "synthetic") {
    return std::make_unique<objective::SyntheticObjective>(config.synthetic);
  }
  if (config.objective_kind == "surrogate") {
    std::vector<std::string> layers = config.surrogate_layers;
    if (layers.empty()) {
      for (const auto& entry : fs::directory_iterator(config.snapshot_dir)) {
        if (entry.path().extension() == ".qtns") layers.push_back(entry.path().string());
      }
      std::sort(layers.begin(), layers.end());
    }
    if (static_cast<int>(layers.size()) != spec.conv_count()) {
      throw ConfigError("surrogate snapshot has " + std::to_string(layers.size()) +
                        " layers but the network spec has " +
                        std::to_string(spec.conv_count()) + " CONV layers");
    }
    return std::make_unique<objective::SurrogateObjective>(std::move(layers), config.surrogate);
  }
  return std::make_unique<objective::ExternalObjective>(config.external_command,
                                                        config.external_timeout);
}

search::CandidatePool pool_for(const cli::RunConfig& config) {
  const int dim = config.dimension();
  const int size = config.pool_size > 0 ? config.pool_size : search::default_pool_size(dim);
  return search::halton_pool(dim, size);
}

// ---------------------------------------------------------------------------

int cmd_search(const std::string& config_path, std::optional<std::uint64_t> seed_flag,
               const std::string& out_flag) {
  cli::RunConfig config = cli::load_run_config(config_path);
  if (seed_flag) config.seed = seed_flag;
  if (!config.seed) throw ConfigError(config_path + ": a seed is required for search runs");

  const net::NetworkSpec spec = net::load_netspec(config.network_spec);
  const gp::TaskSet tasks = config.task_set();
  const search::CandidatePool pool = pool_for(config);
  auto objective = make_objective(config, spec);

  const std::string out_dir = resolve_output_dir(config, out_flag);
  fs::create_directories(out_dir);
  const std::string history_path = out_dir + "/history.jsonl";
  std::ofstream history(history_path, std::ios::trunc);
  if (!history) throw std::runtime_error("cannot open " + history_path);
  io::write_history_header(history);

  search::SearchConfig search_config;
  search_config.basis = config.basis;
  search_config.grid = config.grid;
  search_config.layer_count = spec.conv_count();
  search_config.refit_every = config.refit_every;
  search_config.fit.restarts = config.fit_restarts;
  search_config.fit.max_iterations = config.fit_iterations;

  search::Budget budget;
  budget.total = config.budget_total;
  budget.max_evaluations = config.max_evaluations;

  const auto started = std::chrono::steady_clock::now();
  const search::SearchResult result = search::run_search(
      *objective, tasks, pool, budget, *config.seed, search_config,
      [&](const search::HistoryEvent& event) {
        io::append_history_event(history, event);
        history.flush();
      });
  const double wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();

  const std::string model_path = out_dir + "/model.json";
  io::save_checkpoint(model_path, {result.model, tasks, config.basis, config.grid,
                                   static_cast<int>(pool.size())});

  rank::RankOptions rank_options;
  rank_options.k = config.k;
  rank_options.top_k = 1;
  rank_options.pessimism_beta = config.pessimism_beta;
  rank_options.grid = config.grid;
  const auto best =
      rank::rank_configs(result.model, pool, config.basis, spec, tasks, rank_options);

  nlohmann::json summary;
  summary["schema"] = "bitcurve/summary";
  summary["version"] = 1;
  summary["seed"] = *config.seed;
  summary["basis"] = curve::basis_name(config.basis);
  summary["degree"] = config.degree;
  summary["grid"] = curve::layer_grid_name(config.grid);
  summary["network_spec"] = config.network_spec;
  summary["pool_size"] = pool.size();
  summary["budget_total"] = result.budget.total;
  summary["spent"] = result.budget.spent;
  summary["init_cost"] = result.init_cost;
  summary["evaluations"] = result.evaluations;
  summary["failures"] = result.failures;
  summary["observations"] = result.model.data().size();
  summary["wall_seconds"] = wall_seconds;
  if (!best.empty()) {
    summary["best"] = {{"weights", best.front().weights.weights},
                       {"bits", best.front().bits.digits()},
                       {"bit_sum", best.front().bit_sum},
                       {"pred_acc", best.front().predicted_accuracy},
                       {"pred_std", best.front().predicted_std},
                       {"effective", best.front().effective},
                       {"memory_mb", best.front().memory_bytes / 1e6}};
  }
  const std::string summary_path = out_dir + "/summary.json";
  std::ofstream summary_out(summary_path, std::ios::trunc);
  summary_out << summary.dump(2) << "\n";

  std::cout << "wrote " << history_path << " (" << result.evaluations << " evaluations)\n";
  std::cout << "wrote " << model_path << "\n";
  std::cout << "wrote " << summary_path << "\n";
  std::cout << "budget: spent " << fmt(result.budget.spent) << " of "
            << fmt(result.budget.total) << " (init " << fmt(result.init_cost) << ")\n";
  if (!best.empty()) {
    std::cout << "best: bits=" << best.front().bits.digits()
              << " pred_acc=" << fmt(best.front().predicted_accuracy, "%.4f")
              << " E=" << fmt(best.front().effective, "%.4f")
              << " memory_mb=" << fmt(best.front().memory_bytes / 1e6, "%.3f") << "\n";
  }
  return 0;
}

int cmd_rank(const std::string& checkpoint_path, const std::string& config_path,
             std::optional<int> top_k_flag, const std::string& out_flag) {
  const cli::RunConfig config = cli::load_run_config(config_path);
  const io::Checkpoint checkpoint = io::load_checkpoint(checkpoint_path);
  const net::NetworkSpec spec = net::load_netspec(config.network_spec);

  const int dim = checkpoint.model.hyperparams().input_dim();
  const int pool_size =
      checkpoint.pool_size > 0 ? checkpoint.pool_size : search::default_pool_size(dim);
  const search::CandidatePool pool = search::halton_pool(dim, pool_size);

  rank::RankOptions options;
  options.k = config.k;
  options.top_k = top_k_flag ? static_cast<std::size_t>(std::max(*top_k_flag, 1))
                             : config.top_k;
  options.pessimism_beta = config.pessimism_beta;
  options.grid = checkpoint.grid;

  const auto ranked = rank::rank_configs(checkpoint.model, pool, checkpoint.basis, spec,
                                         checkpoint.tasks, options);

  // Scatter data over the whole pool (the accuracy-vs-size cloud).
  std::vector<gp::Query> queries;
  for (const auto& point : pool.points) {
    queries.push_back({point, checkpoint.tasks.target_task()});
  }
  const gp::Posterior posterior = checkpoint.model.predict(queries);

  const std::string out_dir = resolve_output_dir(config, out_flag);
  fs::create_directories(out_dir);

  std::ofstream ranked_out(out_dir + "/ranked.csv", std::ios::trunc);
  ranked_out << "# bitcurve/ranked v1\n";
  ranked_out << "rank,weights,bits,bit_sum,memory_mb,pred_acc,pred_std,effective\n";
  for (std::size_t i = 0; i < ranked.size(); ++i) {
    const auto& r = ranked[i];
    ranked_out << (i + 1) << ",\"" << weights_field(r.weights.weights) << "\","
               << r.bits.digits() << ',' << r.bit_sum << ',' << fmt(r.memory_bytes / 1e6)
               << ',' << fmt(r.predicted_accuracy) << ',' << fmt(r.predicted_std) << ','
               << fmt(r.effective) << "\n";
  }

  std::vector<std::pair<double, double>> scatter_points;
  std::ofstream scatter(out_dir + "/scatter.csv", std::ios::trunc);
  scatter << "# bitcurve/scatter v1\n";
  scatter << "memory_mb,pred_acc,bits\n";
  for (std::size_t i = 0; i < pool.size(); ++i) {
    const curve::CurveParams weights{checkpoint.basis, pool.points[i]};
    const curve::BitConfig bits =
        curve::bits_for_layers(weights, spec.conv_count(), checkpoint.grid);
    const double memory_mb = quant::model_size_bytes(spec, bits) / 1e6;
    const double acc = posterior.mean(static_cast<Eigen::Index>(i));
    scatter << fmt(memory_mb) << ',' << fmt(acc) << ',' << bits.digits() << "\n";
    scatter_points.push_back({memory_mb, acc});
  }

  const auto front = rank::pareto_front(scatter_points);
  std::ofstream pareto(out_dir + "/pareto.csv", std::ios::trunc);
  pareto << "# bitcurve/pareto v1\n";
  pareto << "memory_mb,pred_acc,bits\n";
  for (std::size_t index : front) {
    const curve::CurveParams weights{checkpoint.basis, pool.points[index]};
    const curve::BitConfig bits =
        curve::bits_for_layers(weights, spec.conv_count(), checkpoint.grid);
    pareto << fmt(scatter_points[index].first) << ',' << fmt(scatter_points[index].second)
           << ',' << bits.digits() << "\n";
  }

  std::cout << "rank,bits,bit_sum,memory_mb,pred_acc,effective\n";
  for (std::size_t i = 0; i < ranked.size(); ++i) {
    const auto& r = ranked[i];
    std::cout << (i + 1) << ',' << r.bits.digits() << ',' << r.bit_sum << ','
              << fmt(r.memory_bytes / 1e6, "%.4f") << ','
              << fmt(r.predicted_accuracy, "%.4f") << ',' << fmt(r.effective, "%.4f")
              << "\n";
  }
  std::cout << "wrote " << out_dir << "/ranked.csv, scatter.csv ("
            << scatter_points.size() << " rows), pareto.csv (" << front.size()
            << " rows)\n";
  return 0;
}

int cmd_predict(const std::string& checkpoint_path, const std::string& weights_text,
                std::optional<int> task_flag) {
  const io::Checkpoint checkpoint = io::load_checkpoint(checkpoint_path);
  const std::vector<double> weights = parse_weights(weights_text);
  if (static_cast<int>(weights.size()) != checkpoint.model.hyperparams().input_dim()) {
    throw ConfigError("expected " +
                      std::to_string(checkpoint.model.hyperparams().input_dim()) +
                      " weights, got " + std::to_string(weights.size()));
  }
  const int task = task_flag ? *task_flag : checkpoint.tasks.target_task();
  if (task < 1 || task > checkpoint.tasks.count()) {
    throw ConfigError("task outside the ladder: " + std::to_string(task));
  }
  const gp::Posterior posterior = checkpoint.model.predict({{weights, task}});
  std::cout << "task " << task << " epochs "
            << checkpoint.tasks.epochs[static_cast<std::size_t>(task - 1)] << "\n";
  std::cout << "mean " << fmt(posterior.mean(0)) << "\n";
  std::cout << "std " << fmt(std::sqrt(std::max(posterior.variance(0), 0.0))) << "\n";
  return 0;
}

int cmd_quantize(const std::string& input, int bits, int block, const std::string& out_prefix) {
  const quant::Tensor tensor = io::load_qtns(input);
  const quant::QuantizedLayer q = quant::quantize_weights(tensor, bits, block);

  if (!out_prefix.empty()) {
    quant::Tensor vqk;
    vqk.dims = q.source_dims;
    vqk.data.reserve(q.vqk.size());
    for (std::int32_t v : q.vqk) vqk.data.push_back(static_cast<float>(v));
    quant::Tensor kds;
    kds.dims = q.kds_dims;
    kds.data.reserve(q.kds.size());
    for (double v : q.kds) kds.data.push_back(static_cast<float>(v));
    io::save_qtns(out_prefix + ".vqk.qtns", vqk);
    io::save_qtns(out_prefix + ".kds.qtns", kds);

    nlohmann::json meta;
    meta["schema"] = "bitcurve/quantized";
    meta["version"] = 1;
    meta["bit_width"] = q.bit_width;
    meta["block_size"] = q.block_size;
    meta["source_dims"] = q.source_dims;
    std::ofstream meta_out(out_prefix + ".meta.json", std::ios::trunc);
    meta_out << meta.dump(2) << "\n";
  }

  // Per-block SNR distribution.
  const quant::Tensor rebuilt = quant::dequantize(q);
  const quant::BlockShape shape = quant::blocking_shape(tensor.dims);
  const std::int64_t blocks_per_row = (shape.depth + block - 1) / block;
  std::vector<double> block_snrs;
  for (std::int64_t o = 0; o < shape.outer; ++o) {
    for (std::int64_t s = 0; s < shape.inner; ++s) {
      for (std::int64_t blk = 0; blk < blocks_per_row; ++blk) {
        double signal = 0.0, error = 0.0;
        for (std::int64_t c = blk * block;
             c < std::min<std::int64_t>((blk + 1) * block, shape.depth); ++c) {
          const std::size_t i =
              static_cast<std::size_t>((o * shape.depth + c) * shape.inner + s);
          const double w = tensor.data[i];
          const double e = w - rebuilt.data[i];
          signal += w * w;
          error += e * e;
        }
        if (signal == 0.0) continue;  // no-signal blocks are skipped
        block_snrs.push_back(error == 0.0 ? std::numeric_limits<double>::infinity()
                                          : 10.0 * std::log10(signal / error));
      }
    }
  }
  std::sort(block_snrs.begin(), block_snrs.end());

  std::cout << "tensor";
  for (auto d : tensor.dims) std::cout << ' ' << d;
  std::cout << "\nbit_width " << bits << "\nblock_size " << block << "\n";
  std::cout << "snr_db " << fmt(quant::reconstruction_snr(tensor, q)) << "\n";
  if (!block_snrs.empty()) {
    std::cout << "blocks " << block_snrs.size() << "\n";
    std::cout << "block_snr_min " << fmt(block_snrs.front()) << "\n";
    std::cout << "block_snr_median " << fmt(block_snrs[block_snrs.size() / 2]) << "\n";
    std::cout << "block_snr_max " << fmt(block_snrs.back()) << "\n";
  }
  if (!out_prefix.empty()) {
    std::cout << "wrote " << out_prefix << ".vqk.qtns, .kds.qtns, .meta.json\n";
  }
  return 0;
}

int cmd_size(const std::string& spec_path, const std::string& bits_text) {
  const net::NetworkSpec spec = net::load_netspec(spec_path);
  curve::BitConfig bits;
  try {
    bits = curve::parse_bits(bits_text);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  double total;
  try {
    total = quant::model_size_bytes(spec, bits);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }

  std::size_t conv_index = 0;
  for (const auto& layer : spec.layers) {
    const bool conv = layer.kind == net::LayerKind::kConv;
    const double layer_bytes =
        conv ? static_cast<double>(layer.param_count) *
                   (bits.bits[conv_index] + 16.0 / 32.0) / 8.0
             : static_cast<double>(layer.param_count) * 4.0;
    std::cout << "layer " << layer.name << ' ' << (conv ? "CONV" : "FC") << ' '
              << layer.param_count << ' '
              << (conv ? std::to_string(bits.bits[conv_index]) + "b" : "fp32") << ' '
              << fmt(layer_bytes, "%.1f") << "\n";
    if (conv) ++conv_index;
  }
  std::cout << "total_bytes " << fmt(total, "%.1f") << "\n";
  std::cout << "total_mb " << fmt(total / 1e6, "%.6f") << "\n";
  return 0;
}

int cmd_report(const std::string& run_dir) {
  const std::string summary_path = run_dir + "/summary.json";
  std::ifstream summary_in(summary_path);
  if (!summary_in) throw ConfigError("no summary.json under " + run_dir);
  nlohmann::json summary;
  summary_in >> summary;

  const auto history = io::load_history(run_dir + "/history.jsonl");
  std::cout << "run " << run_dir << "\n";
  std::cout << "seed " << summary.value("seed", 0ull) << ", basis "
            << summary.value("basis", "?") << ", pool " << summary.value("pool_size", 0)
            << "\n";
  std::cout << "budget " << fmt(summary.value("spent", 0.0)) << " of "
            << fmt(summary.value("budget_total", 0.0)) << " spent (init "
            << fmt(summary.value("init_cost", 0.0)) << ")\n";

  std::vector<int> per_task;
  int failures = 0;
  for (const auto& event : history) {
    if (event.task > static_cast<int>(per_task.size())) per_task.resize(event.task, 0);
    ++per_task[static_cast<std::size_t>(event.task - 1)];
    if (event.status != "OK") ++failures;
  }
  std::cout << "evaluations " << history.size() << " (failures " << failures << ")\n";
  for (std::size_t l = 0; l < per_task.size(); ++l) {
    std::cout << "  task " << (l + 1) << ": " << per_task[l] << "\n";
  }
  if (summary.contains("best")) {
    std::cout << "best bits " << summary["best"].value("bits", "?") << " pred_acc "
              << fmt(summary["best"].value("pred_acc", 0.0), "%.4f") << " E "
              << fmt(summary["best"].value("effective", 0.0), "%.4f") << " memory_mb "
              << fmt(summary["best"].value("memory_mb", 0.0), "%.3f") << "\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"curve-constrained bit-width search for layered networks"};
  app.require_subcommand(1);

  std::string config_path, checkpoint_path, out_flag, weights_text, bits_text;
  std::string input_path, out_prefix, spec_path, run_dir;
  std::optional<std::uint64_t> seed_flag;
  std::optional<int> top_k_flag, task_flag;
  int q_bits = 8, q_block = 32;

  auto* search_cmd = app.add_subcommand("search", "run a budgeted exploration");
  search_cmd->add_option("--config", config_path, "run config file")->required();
  search_cmd->add_option("--seed", seed_flag, "override the config seed");
  search_cmd->add_option("--out", out_flag, "override the output directory");

  auto* rank_cmd = app.add_subcommand("rank", "rank configurations from a checkpoint");
  rank_cmd->add_option("--checkpoint", checkpoint_path, "model checkpoint")->required();
  rank_cmd->add_option("--config", config_path, "run config file")->required();
  rank_cmd->add_option("--top-k", top_k_flag, "rows to keep in the ranked table");
  rank_cmd->add_option("--out", out_flag, "override the output directory");

  auto* predict_cmd = app.add_subcommand("predict", "point query of a checkpoint");
  predict_cmd->add_option("--checkpoint", checkpoint_path, "model checkpoint")->required();
  predict_cmd->add_option("--weights", weights_text, "comma-separated curve weights")
      ->required();
  predict_cmd->add_option("--task", task_flag, "task index (default: target)");

  auto* quantize_cmd = app.add_subcommand("quantize", "quantize a QTNS tensor");
  quantize_cmd->add_option("--input", input_path, "QTNS tensor file")->required();
  quantize_cmd->add_option("--bits", q_bits, "bit width in [1,8]")->required();
  quantize_cmd->add_option("--block", q_block, "depthwise block size");
  quantize_cmd->add_option("--out", out_prefix, "output prefix for vqk/kds/meta");

  auto* size_cmd = app.add_subcommand("size", "memory accounting for a bit configuration");
  size_cmd->add_option("--spec", spec_path, "network spec file")->required();
  size_cmd->add_option("--bits", bits_text, "bit string, e.g. 4444 or 4x21,3x27")->required();

  auto* report_cmd = app.add_subcommand("report", "summarize a finished run");
  report_cmd->add_option("--run", run_dir, "run output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (app.got_subcommand(search_cmd)) return cmd_search(config_path, seed_flag, out_flag);
    if (app.got_subcommand(rank_cmd)) {
      return cmd_rank(checkpoint_path, config_path, top_k_flag, out_flag);
    }
    if (app.got_subcommand(predict_cmd)) {
      return cmd_predict(checkpoint_path, weights_text, task_flag);
    }
    if (app.got_subcommand(quantize_cmd)) {
      return cmd_quantize(input_path, q_bits, q_block, out_prefix);
    }
    if (app.got_subcommand(size_cmd)) return cmd_size(spec_path, bits_text);
    if (app.got_subcommand(report_cmd)) return cmd_report(run_dir);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const ParseError& e) {
    std::cerr << "parse error: " << e.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "invalid argument: " << e.what() << "\n";
    return 2;
  } catch (const std::domain_error& e) {
    std::cerr << "invalid argument: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
  return 0;
}
