#include "pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <map>
#include <optional>
#include <set>

#include "calibration.hpp"
#include "csv.hpp"
#include "features.hpp"
#include "metrics.hpp"

namespace mage::pipeline {

namespace {

namespace fs = std::filesystem;

std::string out_path(const RunConfig& config, const std::string& rel) {
    return (fs::path(config.data.out_dir) / rel).string();
}

void write_provenance(const RunConfig& config) {
    write_file_atomic(out_path(config, "config.txt"), serialize_run_config(config));
}

// ---------------------------------------------------------------------------
// Week splits

struct WeekSplits {
    std::vector<int> train_core;
    std::vector<int> validation;
    std::vector<int> calibration;
    std::vector<int> evaluation;
};

WeekSplits split_weeks(const std::vector<int>& weeks, const RunConfig& config) {
    std::vector<int> train, test;
    for (int w : weeks) (w <= config.split.train_end_week ? train : test).push_back(w);
    if (train.empty()) throw_data("split: no data weeks at or before train_end_week");

    WeekSplits splits;
    const auto n_val = std::max<std::size_t>(
        1, static_cast<std::size_t>(config.split.validation_frac * static_cast<double>(train.size()) + 0.5));
    if (n_val >= train.size()) throw_data("split: validation slice leaves no training weeks");
    splits.train_core.assign(train.begin(), train.end() - static_cast<std::ptrdiff_t>(n_val));
    splits.validation.assign(train.end() - static_cast<std::ptrdiff_t>(n_val), train.end());

    const auto n_cal =
        static_cast<std::size_t>(config.split.calibration_frac * static_cast<double>(test.size()) + 0.5);
    splits.calibration.assign(test.begin(), test.begin() + static_cast<std::ptrdiff_t>(std::min(n_cal, test.size())));
    splits.evaluation.assign(test.begin() + static_cast<std::ptrdiff_t>(std::min(n_cal, test.size())), test.end());
    return splits;
}

// ---------------------------------------------------------------------------
// Feature-table indexing

struct DataIndex {
    FeatureTable table;
    std::vector<int> weeks;
    std::map<int, std::vector<const FeatureRow*>> rows_by_week;  // rows sorted by trap_id
    std::map<std::pair<std::string, int>, int> label_at;
    std::vector<std::string> trap_ids;  // unique, sorted
    std::map<std::string, GeoPoint> trap_positions;

    int input_dim() const { return static_cast<int>(table.column_names.size()); }
};

DataIndex index_features(FeatureTable table) {
    DataIndex idx;
    idx.table = std::move(table);
    std::set<std::string> traps;
    for (const auto& row : idx.table.rows) {
        idx.rows_by_week[row.week].push_back(&row);
        if (row.label) idx.label_at[{row.trap_id, row.week}] = *row.label;
        if (traps.insert(row.trap_id).second) idx.trap_positions[row.trap_id] = row.position;
    }
    idx.trap_ids.assign(traps.begin(), traps.end());
    for (auto& [week, rows] : idx.rows_by_week) {
        (void)week;
        std::sort(rows.begin(), rows.end(),
                  [](const FeatureRow* a, const FeatureRow* b) { return a->trap_id < b->trap_id; });
        idx.weeks.push_back(week);
    }
    std::sort(idx.weeks.begin(), idx.weeks.end());
    return idx;
}

// ---------------------------------------------------------------------------
// Batch construction

struct BatchOptions {
    Regime regime = Regime::Supervised;
    std::size_t k = 10;
    double radius_km = 50.0;
    const std::set<std::string>* exclude_traps = nullptr;
};

// Batch for prediction week t targeting outcomes at t + horizon. Empty when
// the week has no usable nodes.
std::optional<WeekBatch> make_batch(const DataIndex& idx, int week, int horizon, const BatchOptions& opt) {
    const auto it = idx.rows_by_week.find(week);
    if (it == idx.rows_by_week.end()) return std::nullopt;

    std::vector<const FeatureRow*> rows;
    for (const FeatureRow* row : it->second) {
        if (opt.exclude_traps && opt.exclude_traps->count(row->trap_id)) continue;
        if (opt.regime == Regime::Supervised && !row->label) continue;
        rows.push_back(row);
    }
    if (rows.empty()) return std::nullopt;

    WeekBatch batch;
    batch.week = week;

    std::vector<TrapObservation> obs;
    obs.reserve(rows.size());
    for (const FeatureRow* row : rows) obs.push_back({row->trap_id, row->position, row->label.has_value()});
    batch.graph = opt.regime == Regime::Supervised
                      ? build_supervised_graph(obs, week, opt.k, opt.radius_km)
                      : build_semisupervised_graph(obs, week, opt.k, opt.radius_km);

    batch.features = Tensor::zeros(rows.size(), rows.front()->features.size());
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (std::size_t c = 0; c < rows[i]->features.size(); ++c)
            batch.features.at(i, c) = rows[i]->features[c];

    batch.targets.assign(rows.size(), 0.0);
    batch.target_mask.assign(rows.size(), 0);
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const auto label_it = idx.label_at.find({rows[i]->trap_id, week + horizon});
        if (label_it != idx.label_at.end()) {
            batch.targets[i] = static_cast<double>(label_it->second);
            batch.target_mask[i] = 1;
        }
    }
    return batch;
}

std::vector<WeekBatch> batches_for_outcome_weeks(const DataIndex& idx, const std::vector<int>& outcome_weeks,
                                                 int horizon, const BatchOptions& opt) {
    std::vector<WeekBatch> batches;
    for (int w : outcome_weeks) {
        auto batch = make_batch(idx, w - horizon, horizon, opt);
        if (batch && batch->labeled_count() > 0) batches.push_back(std::move(*batch));
    }
    return batches;
}

// ---------------------------------------------------------------------------
// Connectivity partition over the static all-traps graph

ConnectivityPartition static_partition(const DataIndex& idx, const RunConfig& config) {
    SpatialGraph g;
    g.week = -1;
    for (const auto& trap : idx.trap_ids) {
        g.node_ids.push_back(trap);
        g.positions.push_back(idx.trap_positions.at(trap));
    }
    g.labeled_mask.assign(g.node_ids.size(), true);
    g.in_neighbors = build_knn_graph(g.positions, config.graph.k, config.graph.radius_km);
    return connectivity_partition(g);
}

// Traps excluded from training for the subset protocol: lower80 drops the
// most connected quintile, upper80 drops the least connected.
std::set<std::string> training_exclusions(const DataIndex& idx, const RunConfig& config) {
    std::set<std::string> excluded;
    if (config.train.subset == "all") return excluded;
    const ConnectivityPartition part = static_partition(idx, config);
    const auto& held_out = config.train.subset == "lower80" ? part.upper_set : part.lower_set;
    for (std::size_t v : held_out) excluded.insert(idx.trap_ids[v]);
    return excluded;
}

// Trap filter for an evaluation subset column.
std::optional<std::set<std::string>> evaluation_filter(const DataIndex& idx, const RunConfig& config,
                                                       const std::string& subset) {
    if (subset == "all") return std::nullopt;
    const ConnectivityPartition part = static_partition(idx, config);
    std::set<std::string> keep;
    const auto& members = subset == "upper20" ? part.upper_set : part.lower_set;
    for (std::size_t v : members) keep.insert(idx.trap_ids[v]);
    return keep;
}

// ---------------------------------------------------------------------------
// Checkpoint IO helpers

std::string checkpoint_path(const RunConfig& config, int horizon, std::uint64_t seed) {
    return out_path(config, "checkpoints/" + config.train.subset + "/model_h" + std::to_string(horizon) +
                                "_s" + std::to_string(seed) + ".ckpt");
}

std::string model_label(const RunConfig& config) {
    return variant_name(config.model.variant) +
           (config.train.regime == Regime::SemiSupervised ? "-ssl" : "-sl");
}

struct EnsembleMembers {
    ModelConfig config;
    std::vector<ModelParameters> params;
};

EnsembleMembers load_members(const RunConfig& config, int horizon, int expected_input_dim) {
    EnsembleMembers members;
    for (std::uint64_t seed : config.train.seeds) {
        const std::string path = checkpoint_path(config, horizon, seed);
        if (!fs::exists(path)) throw_io("missing checkpoint: " + path);
        Checkpoint ckpt = load_checkpoint(path);
        if (ckpt.config.input_dim != expected_input_dim)
            throw_data(path + ": checkpoint input_dim " + std::to_string(ckpt.config.input_dim) +
                       " does not match feature table width " + std::to_string(expected_input_dim));
        members.config = ckpt.config;
        members.params.push_back(std::move(ckpt.params));
    }
    return members;
}

// ---------------------------------------------------------------------------
// Forecast records

struct Forecast {
    std::string trap_id;
    int week = 0;  // prediction week t; the outcome week is t + horizon
    int horizon = 0;
    double probability = 0.0;
    double calibrated = 0.0;
    std::optional<int> label;  // outcome at t + horizon when observed
};

// Ensemble-mean forecasts for all nodes present at the prediction weeks
// implied by the outcome weeks.
std::vector<Forecast> forecast_instances(const DataIndex& idx, const EnsembleMembers& members,
                                         const std::vector<int>& outcome_weeks, int horizon,
                                         const BatchOptions& opt) {
    std::vector<Forecast> forecasts;
    for (int w : outcome_weeks) {
        auto batch = make_batch(idx, w - horizon, horizon, opt);
        if (!batch) continue;
        const auto probs =
            ensemble_mean_probabilities(members.config, members.params, batch->graph, batch->features);
        for (std::size_t v = 0; v < batch->graph.num_nodes(); ++v) {
            Forecast f;
            f.trap_id = batch->graph.node_ids[v];
            f.week = batch->week;
            f.horizon = horizon;
            f.probability = probs[v];
            if (batch->target_mask[v]) f.label = static_cast<int>(batch->targets[v]);
            forecasts.push_back(std::move(f));
        }
    }
    return forecasts;
}

// Per-seed probabilities for labeled eval records, for seed-averaged metrics.
std::vector<std::vector<Forecast>> per_seed_forecasts(const DataIndex& idx, const EnsembleMembers& members,
                                                      const std::vector<int>& outcome_weeks, int horizon,
                                                      const BatchOptions& opt) {
    std::vector<std::vector<Forecast>> by_seed(members.params.size());
    for (int w : outcome_weeks) {
        auto batch = make_batch(idx, w - horizon, horizon, opt);
        if (!batch) continue;
        for (std::size_t s = 0; s < members.params.size(); ++s) {
            const auto probs =
                predict_probabilities(members.config, members.params[s], batch->graph, batch->features);
            for (std::size_t v = 0; v < batch->graph.num_nodes(); ++v) {
                if (!batch->target_mask[v]) continue;
                Forecast f;
                f.trap_id = batch->graph.node_ids[v];
                f.week = batch->week;
                f.horizon = horizon;
                f.probability = probs[v];
                f.label = static_cast<int>(batch->targets[v]);
                by_seed[s].push_back(std::move(f));
            }
        }
    }
    return by_seed;
}

Score average_scores(const std::vector<Score>& scores) {
    Score out;
    out.defined = !scores.empty();
    for (const Score& s : scores) out.defined = out.defined && s.defined;
    if (!out.defined) return {0.0, false};
    for (const Score& s : scores) out.value += s.value;
    out.value /= static_cast<double>(scores.size());
    return out;
}

MetricsRow average_rows(const std::vector<MetricsRow>& rows) {
    MetricsRow out = rows.front();
    auto pick = [&](Score MetricsRow::* member) {
        std::vector<Score> scores;
        for (const auto& row : rows) scores.push_back(row.*member);
        out.*member = average_scores(scores);
    };
    pick(&MetricsRow::auc_score);
    pick(&MetricsRow::f1_score);
    pick(&MetricsRow::sensitivity_score);
    pick(&MetricsRow::specificity_score);
    pick(&MetricsRow::accuracy_score);
    pick(&MetricsRow::brier_score);
    return out;
}

std::string forecast_csv(const std::vector<Forecast>& forecasts, const WeekSplits& splits) {
    std::set<int> calib_weeks(splits.calibration.begin(), splits.calibration.end());
    std::vector<const Forecast*> ordered;
    ordered.reserve(forecasts.size());
    for (const auto& f : forecasts) ordered.push_back(&f);
    std::stable_sort(ordered.begin(), ordered.end(), [](const Forecast* a, const Forecast* b) {
        if (a->horizon != b->horizon) return a->horizon < b->horizon;
        if (a->week != b->week) return a->week < b->week;
        return a->trap_id < b->trap_id;
    });

    std::string out = "trap_id,week,horizon,logit,probability,calibrated,label,split\n";
    for (const Forecast* f : ordered) {
        const double clamped = std::clamp(f->probability, 1e-15, 1.0 - 1e-15);
        const double logit = std::log(clamped / (1.0 - clamped));
        out += f->trap_id + "," + std::to_string(f->week) + "," + std::to_string(f->horizon) + "," +
               format_double(logit) + "," + format_double(f->probability) + "," +
               format_double(f->calibrated) + ",";
        if (f->label) out += std::to_string(*f->label);
        out += ",";
        out += calib_weeks.count(f->week + f->horizon) ? "calibration" : "evaluation";
        out += "\n";
    }
    return out;
}

}  // namespace

void cmd_synth(const RunConfig& config) {
    config.validate();
    write_provenance(config);
    const SyntheticWorld world = generate_synthetic_world(config.synth);
    write_file_atomic(config.data.input, serialize_raw_table(world.table));
    write_file_atomic(config.data.oracle, serialize_oracle(world.oracle));
}

void cmd_preprocess(const RunConfig& config) {
    config.validate();
    write_provenance(config);
    const RawTable raw = load_raw_table(config.data.input);
    AssembledFeatures assembled = assemble_features(raw, config.split.train_end_week);
    write_file_atomic(config.data.features, serialize_feature_table(assembled.table));
    write_file_atomic(config.data.scaler, serialize_scaler(assembled.scaler));
}

void cmd_build_graph(const RunConfig& config) {
    config.validate();
    write_provenance(config);
    const DataIndex idx = index_features(load_feature_table(config.data.features));

    BatchOptions opt;
    opt.regime = config.train.regime;
    opt.k = config.graph.k;
    opt.radius_km = config.graph.radius_km;

    std::vector<SpatialGraph> graphs;
    for (int week : idx.weeks) {
        auto batch = make_batch(idx, week, 0, opt);
        if (batch) graphs.push_back(std::move(batch->graph));
    }
    write_file_atomic(out_path(config, "edges.csv"), export_edge_list(graphs));
}

void cmd_train(const RunConfig& config) {
    config.validate();
    write_provenance(config);
    const DataIndex idx = index_features(load_feature_table(config.data.features));
    const WeekSplits splits = split_weeks(idx.weeks, config);
    const std::set<std::string> excluded = training_exclusions(idx, config);

    BatchOptions opt;
    opt.regime = config.train.regime;
    opt.k = config.graph.k;
    opt.radius_km = config.graph.radius_km;
    opt.exclude_traps = excluded.empty() ? nullptr : &excluded;

    ModelConfig model_config = config.model;
    model_config.input_dim = idx.input_dim();

    for (int horizon : config.train.horizons) {
        const auto train_batches = batches_for_outcome_weeks(idx, splits.train_core, horizon, opt);
        const auto val_batches = batches_for_outcome_weeks(idx, splits.validation, horizon, opt);
        if (train_batches.empty())
            throw_data("train: no labeled targets at horizon " + std::to_string(horizon));

        for (std::uint64_t seed : config.train.seeds) {
            TrainConfig tcfg;
            tcfg.horizon = horizon;
            tcfg.epochs = config.train.epochs;
            tcfg.base_lr = config.train.base_lr;
            tcfg.min_lr = config.train.min_lr;
            tcfg.weight_decay = config.train.weight_decay;
            tcfg.agc_lambda = config.train.agc_lambda;
            tcfg.patience = config.train.patience;
            tcfg.seed = seed;
            tcfg.regime = config.train.regime;

            const TrainingRun run = train(model_config, tcfg, train_batches, val_batches);
            save_checkpoint(checkpoint_path(config, horizon, seed), model_config, run.best_params,
                            config.data.scaler);
            write_file_atomic(out_path(config, "logs/" + config.train.subset + "/train_h" +
                                                   std::to_string(horizon) + "_s" + std::to_string(seed) +
                                                   ".csv"),
                              serialize_training_log(run));
        }
    }
}

void cmd_evaluate(const RunConfig& config) {
    config.validate();
    write_provenance(config);
    const DataIndex idx = index_features(load_feature_table(config.data.features));
    const WeekSplits splits = split_weeks(idx.weeks, config);
    if (splits.evaluation.empty()) throw_data("evaluate: no evaluation weeks after the calibration slice");

    BatchOptions opt;
    opt.regime = config.train.regime;
    opt.k = config.graph.k;
    opt.radius_km = config.graph.radius_km;

    std::vector<MetricsRow> report;
    for (int horizon : config.train.horizons) {
        const EnsembleMembers members = load_members(config, horizon, idx.input_dim());
        const auto by_seed = per_seed_forecasts(idx, members, splits.evaluation, horizon, opt);

        // Logistic baseline trains on per-node features, no graph.
        std::optional<LogisticBaseline> baseline;
        if (config.evaluate.baseline == "logistic") {
            const std::set<std::string> excluded = training_exclusions(idx, config);
            std::vector<std::vector<double>> train_x;
            std::vector<int> train_y;
            for (int w : splits.train_core) {
                const auto it = idx.rows_by_week.find(w - horizon);
                if (it == idx.rows_by_week.end()) continue;
                for (const FeatureRow* row : it->second) {
                    if (excluded.count(row->trap_id)) continue;
                    const auto label_it = idx.label_at.find({row->trap_id, w});
                    if (label_it == idx.label_at.end()) continue;
                    train_x.push_back(row->features);
                    train_y.push_back(label_it->second);
                }
            }
            LogisticBaselineConfig lb_cfg;
            lb_cfg.seed = config.train.seeds.front();
            baseline = train_logistic_baseline(train_x, train_y, lb_cfg);
        }

        for (const std::string& subset : config.evaluate.subsets) {
            const auto keep = evaluation_filter(idx, config, subset);
            std::vector<MetricsRow> seed_rows;
            for (std::size_t s = 0; s < by_seed.size(); ++s) {
                std::vector<double> probs;
                std::vector<int> labels;
                for (const Forecast& f : by_seed[s]) {
                    if (keep && !keep->count(f.trap_id)) continue;
                    probs.push_back(f.probability);
                    labels.push_back(*f.label);
                }
                if (probs.empty()) throw_data("evaluate: subset '" + subset + "' has no labeled records");
                seed_rows.push_back(
                    compute_metrics_row(model_label(config), subset, horizon, probs, labels));
            }
            report.push_back(average_rows(seed_rows));

            if (baseline) {
                std::vector<std::vector<double>> eval_x;
                std::vector<int> eval_y;
                for (int w : splits.evaluation) {
                    const auto it = idx.rows_by_week.find(w - horizon);
                    if (it == idx.rows_by_week.end()) continue;
                    for (const FeatureRow* row : it->second) {
                        if (keep && !keep->count(row->trap_id)) continue;
                        const auto label_it = idx.label_at.find({row->trap_id, w});
                        if (label_it == idx.label_at.end()) continue;
                        eval_x.push_back(row->features);
                        eval_y.push_back(label_it->second);
                    }
                }
                if (!eval_x.empty())
                    report.push_back(compute_metrics_row("logistic", subset, horizon,
                                                         baseline->predict(eval_x), eval_y));
            }
        }
    }

    write_file_atomic(out_path(config, "metrics.csv"), serialize_metrics_report(report));
    if (!config.evaluate.plot.empty())
        write_file_atomic(out_path(config, config.evaluate.plot), render_metrics_svg(report));
}

void cmd_calibrate(const RunConfig& config) {
    config.validate();
    write_provenance(config);
    const DataIndex idx = index_features(load_feature_table(config.data.features));
    const WeekSplits splits = split_weeks(idx.weeks, config);
    if (splits.calibration.empty())
        throw_data("calibrate: calibration split is empty; raise split.calibration_frac");

    BatchOptions opt;
    opt.regime = config.train.regime;
    opt.k = config.graph.k;
    opt.radius_km = config.graph.radius_km;

    std::vector<int> test_weeks = splits.calibration;
    test_weeks.insert(test_weeks.end(), splits.evaluation.begin(), splits.evaluation.end());

    std::vector<Forecast> all_forecasts;
    for (int horizon : config.train.horizons) {
        const EnsembleMembers members = load_members(config, horizon, idx.input_dim());
        auto forecasts = forecast_instances(idx, members, test_weeks, horizon, opt);

        // Per-horizon isotonic fit on the labeled calibration records.
        std::set<int> calib_weeks(splits.calibration.begin(), splits.calibration.end());
        std::vector<double> calib_scores;
        std::vector<int> calib_labels;
        for (const Forecast& f : forecasts) {
            if (!f.label || !calib_weeks.count(f.week + f.horizon)) continue;
            calib_scores.push_back(f.probability);
            calib_labels.push_back(*f.label);
        }
        CalibratedPredictor predictor;
        predictor.lambda = config.calibrate.lambda;
        predictor.isotonic = fit_isotonic(calib_scores, calib_labels);

        for (Forecast& f : forecasts) f.calibrated = calibrate(f.probability, predictor);
        all_forecasts.insert(all_forecasts.end(), forecasts.begin(), forecasts.end());
    }

    write_file_atomic(out_path(config, "predictions_" + config.train.subset + ".csv"),
                      forecast_csv(all_forecasts, splits));
}

void cmd_entropy_report(const RunConfig& config) {
    config.validate();
    write_provenance(config);
    const DataIndex idx = index_features(load_feature_table(config.data.features));

    // Group membership from the binary indicator columns: a trap belongs to
    // a group when the indicator is hot in any of its test-period rows.
    std::size_t first_continuous = idx.table.column_names.size() - 8;
    std::map<std::string, std::vector<double>> trap_indicators;
    for (const auto& row : idx.table.rows) {
        if (row.week <= config.split.train_end_week) continue;
        auto& acc = trap_indicators[row.trap_id];
        if (acc.empty()) acc.assign(first_continuous, 0.0);
        for (std::size_t c = 0; c < first_continuous; ++c)
            if (row.features[c] == 1.0) acc[c] = 1.0;
    }

    // Node entropies per requested training subset, from the calibrated
    // prediction files.
    std::vector<std::pair<std::string, std::map<std::string, std::vector<double>>>> probs_by_subset;
    for (const std::string& subset : config.entropy.subsets) {
        const std::string path = out_path(config, "predictions_" + subset + ".csv");
        if (!fs::exists(path)) throw_io("entropy-report: missing predictions file " + path);
        CsvTable csv = read_csv(path);
        const int trap_col = csv.column("trap_id"), cal_col = csv.column("calibrated");
        if (trap_col < 0 || cal_col < 0) throw_data(path + ": not a predictions file");
        std::map<std::string, std::vector<double>> per_trap;
        for (const auto& row : csv.rows)
            per_trap[row[static_cast<std::size_t>(trap_col)]].push_back(
                parse_double(row[static_cast<std::size_t>(cal_col)], path));
        probs_by_subset.emplace_back(subset, std::move(per_trap));
    }

    // Node universe: traps predicted under every requested subset.
    std::vector<std::string> nodes;
    for (const auto& [trap, indicators] : trap_indicators) {
        (void)indicators;
        bool everywhere = true;
        for (const auto& [subset, per_trap] : probs_by_subset)
            everywhere = everywhere && per_trap.count(trap) > 0;
        if (everywhere) nodes.push_back(trap);
    }
    if (nodes.empty()) throw_data("entropy-report: no traps common to all requested subsets");

    EntropyGroups groups;
    groups.group_names.assign(idx.table.column_names.begin(),
                              idx.table.column_names.begin() + static_cast<std::ptrdiff_t>(first_continuous));
    for (const auto& trap : nodes) groups.node_indicators.push_back(trap_indicators.at(trap));

    std::vector<std::pair<std::string, std::vector<double>>> entropies_by_subset;
    for (const auto& [subset, per_trap] : probs_by_subset) {
        std::vector<double> entropies;
        entropies.reserve(nodes.size());
        for (const auto& trap : nodes) entropies.push_back(node_entropy(per_trap.at(trap)));
        entropies_by_subset.emplace_back(subset, std::move(entropies));
    }

    write_file_atomic(out_path(config, "entropy.csv"),
                      serialize_entropy_report(entropy_by_group(groups, entropies_by_subset)));
}

void run_command(const RunConfig& config, const std::string& command) {
    if (command == "synth")
        cmd_synth(config);
    else if (command == "preprocess")
        cmd_preprocess(config);
    else if (command == "build-graph")
        cmd_build_graph(config);
    else if (command == "train")
        cmd_train(config);
    else if (command == "evaluate")
        cmd_evaluate(config);
    else if (command == "calibrate")
        cmd_calibrate(config);
    else if (command == "entropy-report")
        cmd_entropy_report(config);
    else
        throw_config("unknown command '" + command +
                     "' (expected synth, preprocess, build-graph, train, evaluate, calibrate, or entropy-report)");
}

}  // namespace mage::pipeline
