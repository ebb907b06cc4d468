#include "n2nsdf/commands.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "n2nsdf/checkpoint.hpp"
#include "n2nsdf/errors.hpp"
#include "n2nsdf/extract.hpp"
#include "n2nsdf/noise.hpp"
#include "n2nsdf/sampling.hpp"

namespace n2nsdf {

namespace {

std::filesystem::path prepare_output_dir(const ExperimentConfig& config) {
    const auto dir = config.output_path();
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec || !std::filesystem::is_directory(dir))
        throw IoError("cannot create output directory '" + dir.string() + "'");
    return dir;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write '" + path.string() + "'");
    out << text;
    if (!out) throw IoError("write failed for '" + path.string() + "'");
}

// Sidecar for formats that cannot carry a header of their own (XYZ, CSV).
void write_manifest(const std::filesystem::path& dir, const std::string& command, const ExperimentConfig& config,
                    const std::vector<std::filesystem::path>& files, const nlohmann::ordered_json& extra = {}) {
    nlohmann::ordered_json j;
    j["command"] = command;
    j["config_hash"] = config_hash(config);
    j["seed"] = config.train.seed;
    auto& names = j["files"] = nlohmann::ordered_json::array();
    for (const auto& f : files) names.push_back(f.filename().string());
    if (!extra.is_null())
        for (const auto& [k, v] : extra.items()) j[k] = v;
    j["config"] = canonical_config(config);
    write_text(dir / (command + "_manifest.json"), j.dump(2) + "\n");
}

std::string format_number(double v) {
    if (std::isnan(v)) return "nan";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.9g", v);
    return buf;
}

std::map<std::string, std::string> run_meta(const ExperimentConfig& config) {
    return {{"config_hash", config_hash(config)},
            {"mode", std::string(mode_name(config.train.mode))},
            {"seed", std::to_string(config.train.seed)},
            {"shape", config.train.shape}};
}

}  // namespace

CommandOutcome cmd_sample(const ExperimentConfig& config) {
    const TrainConfig train = config.train_config();
    const auto dir = prepare_output_dir(config);
    const AnalyticSdf shape = shape_by_id(train.shape);
    const PointCloud clean = sample_surface(shape, train.n_points, clean_cloud_seed(train.seed), train.cube);
    const auto [p1, p2] = make_pair(clean, train.noise, noise_stream_seed(train.seed), 0);

    CommandOutcome outcome;
    outcome.outputs = {dir / "clean.xyz", dir / "noisy_1.xyz", dir / "noisy_2.xyz"};
    // XYZ carries positions only; normals are dropped from the clean cloud.
    save_xyz(PointCloud{clean.points, {}}, outcome.outputs[0]);
    save_xyz(p1, outcome.outputs[1]);
    save_xyz(p2, outcome.outputs[2]);
    write_manifest(dir, "sample", config, outcome.outputs);
    outcome.message = "wrote " + std::to_string(clean.size()) + " points per cloud to " + dir.string();
    return outcome;
}

CommandOutcome cmd_train(const ExperimentConfig& config) {
    const TrainConfig train = config.train_config();
    const auto dir = prepare_output_dir(config);
    const auto checkpoint = dir / "field.ckpt";
    const std::string hash = config_hash(config);

    TrainResult result = run_training(train, checkpoint, run_meta(config));

    CommandOutcome outcome;
    outcome.outputs = {checkpoint, dir / "train_record.jsonl", dir / "train_timing.jsonl"};
    write_text(outcome.outputs[1], to_jsonl(result.record, hash, false));
    write_text(outcome.outputs[2], to_jsonl(result.record, hash, true));
    std::ostringstream msg;
    msg << "trained " << train.epochs << " epochs (" << mode_name(train.mode) << ")";
    if (!result.record.epochs.empty()) msg << ", held-out mse " << result.record.epochs.back().heldout_mse;
    outcome.message = msg.str();
    return outcome;
}

CommandOutcome cmd_reconstruct(const ExperimentConfig& config, const std::filesystem::path& checkpoint) {
    if (!std::filesystem::exists(checkpoint)) throw IoError("checkpoint '" + checkpoint.string() + "' not found");
    const Checkpoint ckpt = load_checkpoint(checkpoint);
    const GridSpec grid = config.grid();
    const Extraction extraction = marching_cubes(ckpt.field, grid);

    CommandOutcome outcome;
    if (extraction.empty_surface) {
        outcome.exit_code = kExitEmptySurface;
        outcome.message = "empty surface: field has no zero crossing on the grid";
        return outcome;
    }
    const auto dir = prepare_output_dir(config);
    std::vector<std::string> header = {"config_hash " + config_hash(config),
                                       "seed " + std::to_string(config.train.seed),
                                       "resolution " + std::to_string(grid.resolution)};
    if (const auto it = ckpt.meta.find("config_hash"); it != ckpt.meta.end())
        header.push_back("checkpoint_config_hash " + it->second);
    outcome.outputs = {dir / "mesh.obj"};
    save_mesh(extraction.mesh, outcome.outputs[0], header);
    outcome.message = "wrote " + std::to_string(extraction.mesh.faces().size()) + " faces";
    return outcome;
}

CommandOutcome cmd_eval(const ExperimentConfig& config, const std::filesystem::path& input) {
    if (!std::filesystem::exists(input)) throw IoError("input '" + input.string() + "' not found");
    const AnalyticSdf truth = [&] {
        try {
            return shape_by_id(config.train.shape);
        } catch (const std::invalid_argument& e) {
            throw ConfigError("shape", e.what());
        }
    }();
    const EvaluationOptions options = config.evaluation();

    MetricsReport report;
    CommandOutcome outcome;
    if (is_checkpoint_file(input)) {
        const Checkpoint ckpt = load_checkpoint(input);
        const Extraction extraction = marching_cubes(ckpt.field, config.grid());
        if (extraction.empty_surface) {
            outcome.exit_code = kExitEmptySurface;
            outcome.message = "empty surface: field has no zero crossing on the grid";
            return outcome;
        }
        report = evaluate_mesh(extraction.mesh, truth, options, &ckpt.field);
    } else {
        const TriangleMesh mesh = load_mesh(input);
        report = evaluate_mesh(mesh, truth, options);
    }
    report.config_hash = config_hash(config);

    const auto dir = prepare_output_dir(config);
    outcome.outputs = {dir / "metrics.json"};
    write_text(outcome.outputs[0], to_json(report) + "\n");
    outcome.message = "chamfer " + format_number(report.chamfer) + ", f_score " + format_number(report.f_score);
    return outcome;
}

// ---------------------------------------------------------------------------

std::vector<SweepCell> expand_sweep(const ExperimentConfig& config) {
    if (!config.sweep_shapes && !config.sweep_noise_laws && !config.sweep_sigmas && !config.sweep_mus &&
        !config.sweep_modes && !config.sweep_seeds)
        throw ConfigError("sweep", "no sweep lists given");

    const auto shapes = config.sweep_shapes.value_or(std::vector<std::string>{config.train.shape});
    const auto laws = config.sweep_noise_laws.value_or(std::vector<std::string>{config.noise_law});
    const auto sigmas = config.sweep_sigmas.value_or(std::vector<double>{config.sigma});
    const auto mus = config.sweep_mus.value_or(std::vector<double>{config.mu});
    const auto modes =
        config.sweep_modes.value_or(std::vector<std::string>{std::string(mode_name(config.train.mode))});
    const auto seeds = config.sweep_seeds.value_or(std::vector<std::uint64_t>{config.train.seed});

    std::vector<SweepCell> cells;
    for (const auto& shape : shapes)
        for (const auto& law : laws) {
            const std::vector<double> law_mus = law == "gaussian" ? mus : std::vector<double>{0.0};
            for (const double mu : law_mus)
                for (const double sigma : sigmas)
                    for (const auto& mode : modes)
                        for (const auto seed : seeds) cells.push_back({shape, law, sigma, mu, parse_mode(mode), seed});
        }
    return cells;
}

ExperimentConfig cell_config(const ExperimentConfig& base, const SweepCell& cell) {
    ExperimentConfig c = base;
    c.train.shape = cell.shape;
    c.noise_law = cell.noise_law;
    c.sigma = cell.sigma;
    c.mu = cell.mu;
    c.train.mode = cell.mode;
    c.train.seed = cell.seed;
    c.sweep_shapes.reset();
    c.sweep_noise_laws.reset();
    c.sweep_sigmas.reset();
    c.sweep_mus.reset();
    c.sweep_modes.reset();
    c.sweep_seeds.reset();
    return c;
}

ExperimentRow run_cell(const ExperimentConfig& base, const SweepCell& cell, const PointCloud* gt_samples) {
    const ExperimentConfig config = cell_config(base, cell);
    const TrainConfig train = config.train_config();
    const TrainResult result = run_training(train);

    ExperimentRow row;
    row.cell = cell;
    row.epochs = train.epochs;
    const Extraction extraction = marching_cubes(result.field, config.grid());
    if (extraction.empty_surface) return row;

    const AnalyticSdf truth = shape_by_id(cell.shape);
    const EvaluationOptions options = config.evaluation();
    row.metrics = gt_samples ? evaluate_mesh(extraction.mesh, truth, *gt_samples, options, &result.field)
                             : evaluate_mesh(extraction.mesh, truth, options, &result.field);
    row.metrics->config_hash = config_hash(config);
    return row;
}

std::string csv_header() { return "shape,noise_law,sigma,mu,mode,chamfer,f_score,nc,mnc,iou,seed,epochs"; }

std::string csv_row(const ExperimentRow& row) {
    const double nan = std::nan("");
    const auto& m = row.metrics;
    std::ostringstream out;
    out << row.cell.shape << ',' << row.cell.noise_law << ',' << format_number(row.cell.sigma) << ','
        << format_number(row.cell.mu) << ',' << mode_name(row.cell.mode) << ',' << format_number(m ? m->chamfer : nan)
        << ',' << format_number(m ? m->f_score : nan) << ',' << format_number(m ? m->nc : nan) << ','
        << format_number(m ? m->mnc : nan) << ',';
    if (!m)
        out << "nan";
    else if (m->iou)
        out << format_number(*m->iou);
    out << ',' << row.cell.seed << ',' << row.epochs;
    return out.str();
}

CommandOutcome cmd_experiment(const ExperimentConfig& config, std::ostream* log) {
    const std::vector<SweepCell> cells = expand_sweep(config);
    for (const auto& cell : cells) (void)cell_config(config, cell).train_config();
    if (log) *log << "experiment: " << cells.size() << " cells\n";
    const auto dir = prepare_output_dir(config);

    // Ground-truth samples depend only on shape and seed; reuse them across cells.
    std::map<std::pair<std::string, std::uint64_t>, PointCloud> gt_cache;
    std::string csv = csv_header() + "\n";
    for (std::size_t i = 0; i < cells.size(); ++i) {
        const SweepCell& cell = cells[i];
        const ExperimentConfig cc = cell_config(config, cell);
        const auto key = std::make_pair(cell.shape, cell.seed);
        auto it = gt_cache.find(key);
        if (it == gt_cache.end())
            it = gt_cache.emplace(key, ground_truth_samples(shape_by_id(cell.shape), cc.evaluation())).first;
        const ExperimentRow row = run_cell(config, cell, &it->second);
        csv += csv_row(row) + "\n";
        if (log) *log << "[" << (i + 1) << "/" << cells.size() << "] " << csv_row(row) << "\n";
    }

    CommandOutcome outcome;
    outcome.outputs = {dir / "results.csv"};
    write_text(outcome.outputs[0], csv);
    write_manifest(dir, "experiment", config, outcome.outputs, {{"cells", cells.size()}});
    outcome.message = "wrote " + std::to_string(cells.size()) + " rows";
    return outcome;
}

int run_guarded(const std::function<CommandOutcome()>& command, std::ostream& err) {
    try {
        const CommandOutcome outcome = command();
        if (!outcome.message.empty()) err << outcome.message << "\n";
        return outcome.exit_code;
    } catch (const ConfigError& e) {
        err << "config error [" << e.key() << "]: " << e.what() << "\n";
        return kExitConfigOrIo;
    } catch (const TrainingDiverged& e) {
        err << "training diverged at epoch " << e.epoch() << ": " << e.what() << "\n";
        return kExitDiverged;
    } catch (const Error& e) {
        err << "error: " << e.what() << "\n";
        return kExitConfigOrIo;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kExitConfigOrIo;
    }
}

}  // namespace n2nsdf
