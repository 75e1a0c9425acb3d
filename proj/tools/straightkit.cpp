// straightkit command line: backbone extraction, single-image augmentation,
// translator training, straightening, the geometric baseline, synthetic
// oracle generation, and method evaluation.

#include <CLI11.hpp>
#include <omp.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "straightkit/augment.hpp"
#include "straightkit/backbone.hpp"
#include "straightkit/evalkit.hpp"
#include "straightkit/geobase.hpp"
#include "straightkit/synthgen.hpp"
#include "straightkit/train.hpp"

namespace fs = std::filesystem;
using namespace straightkit;

namespace {

struct Options {
    std::string input, backbone_path, dataset, checkpoint, cases, out, ground_truth;
    bool invert = false;
    int canvas = 256;
    int window = 11;
    double stick_width = 33.0;
    int k = 1000;
    int points = 3;
    double sigma = 18.0;
    double angle = 45.0;
    uint64_t seed = 1;
    std::string mode = "pix2pix";
    double lr = 4e-5;
    double lambda = 100.0;
    int batch = 4;
    int checks = 3;
    int decay_patience = 9;
    double decay = 0.8;
    int stop_patience = 27;
    int max_epochs = 200;
    long max_steps = 0;
    int depth = 4;
    int base = 16;
    double dropout = 0.5;
    double length = 170.0;
    double curvature = 40.0;
    int bends = 1;
};

void write_manifest(const std::string& dir, const std::string& command,
                    const std::vector<std::pair<std::string, std::string>>& kv) {
    std::ofstream m(fs::path(dir) / "manifest.txt", std::ios::app);
    m << "command=" << command << "\n";
    for (const auto& [key, value] : kv) m << key << "=" << value << "\n";
}

std::string fmt(double v) {
    char buf[48];
    std::snprintf(buf, sizeof(buf), "%g", v);
    return buf;
}

TrainConfig to_train_config(const Options& o) {
    TrainConfig cfg;
    cfg.lr = o.lr;
    cfg.lambda_l1 = o.lambda;
    cfg.batch = o.batch;
    cfg.checks_per_epoch = o.checks;
    cfg.decay_patience = o.decay_patience;
    cfg.decay_factor = o.decay;
    cfg.stop_patience = o.stop_patience;
    cfg.max_epochs = o.max_epochs;
    cfg.max_steps = o.max_steps;
    cfg.seed = o.seed;
    cfg.dropout = o.dropout;
    cfg.depth = o.depth;
    cfg.base_ch = o.base;
    cfg.mode = train_mode_from_string(o.mode);
    return cfg;
}

std::vector<std::pair<std::string, std::string>> train_kv(const Options& o) {
    return {{"dataset", o.dataset},
            {"mode", o.mode},
            {"lr", fmt(o.lr)},
            {"lambda", fmt(o.lambda)},
            {"batch", fmt(o.batch)},
            {"checks", fmt(o.checks)},
            {"decay_patience", fmt(o.decay_patience)},
            {"decay", fmt(o.decay)},
            {"stop_patience", fmt(o.stop_patience)},
            {"max_epochs", fmt(o.max_epochs)},
            {"max_steps", fmt(static_cast<double>(o.max_steps))},
            {"depth", fmt(o.depth)},
            {"base", fmt(o.base)},
            {"dropout", fmt(o.dropout)},
            {"seed", std::to_string(o.seed)}};
}

void run_backbone(const Options& o) {
    fs::create_directories(o.out);
    GrayImage img = load_image(o.input, o.invert, o.canvas);
    const Axis axis = smooth_axis(extract_central_axis(img), o.window);
    const ControlPoints cp = make_control_points(axis);
    save_image(img, (fs::path(o.out) / "chromosome.png").string());
    save_image(rasterize_backbone(cp, img.width, o.stick_width),
               (fs::path(o.out) / "curved.png").string());
    save_image(make_vertical_backbone(cp, img.width, o.stick_width),
               (fs::path(o.out) / "vertical.png").string());
    std::ofstream(fs::path(o.out) / "control_points.txt") << control_points_table(cp);
    write_manifest(o.out, "backbone",
                   {{"input", o.input},
                    {"invert", o.invert ? "true" : "false"},
                    {"canvas", fmt(o.canvas)},
                    {"window", fmt(o.window)},
                    {"width", fmt(o.stick_width)},
                    {"seed", std::to_string(o.seed)}});
}

void run_augment(const Options& o) {
    fs::create_directories(o.out);
    GrayImage y = load_image(o.input);
    GrayImage x = load_image(o.backbone_path);
    AugmentedDataset ds = build_augmented_dataset(y, x, o.k, o.seed, o.points, o.sigma, o.angle);
    save_dataset(ds, o.out);
    write_manifest(o.out, "augment",
                   {{"input", o.input}, {"backbone", o.backbone_path}, {"angle", fmt(o.angle)}});
    std::cerr << "dataset hash " << ds.content_hash() << ", " << ds.train_indices.size()
              << " train / " << ds.val_indices.size() << " validation\n";
}

void run_train(const Options& o) {
    fs::create_directories(o.out);
    AugmentedDataset ds = load_dataset(o.dataset);
    std::ofstream log(fs::path(o.out) / "train_log.txt");
    TrainOutput result = train(ds, to_train_config(o), &log);
    save_checkpoint(result.checkpoint, (fs::path(o.out) / "checkpoint.ckpt").string());
    write_manifest(o.out, "train", train_kv(o));
    std::cerr << "trained " << result.steps << " steps over " << result.epochs
              << " epochs, best validation L1 " << result.best_val << "\n";
}

void run_straighten(const Options& o) {
    fs::create_directories(o.out);
    Checkpoint ckpt = load_checkpoint(o.checkpoint);
    GrayImage backbone = load_image(o.backbone_path);
    GrayImage out = straighten(ckpt, backbone);
    save_image(out, (fs::path(o.out) / "straightened.png").string());
    write_manifest(o.out, "straighten",
                   {{"checkpoint", o.checkpoint}, {"backbone", o.backbone_path}});
}

void run_baseline(const Options& o) {
    fs::create_directories(o.out);
    GrayImage img = load_image(o.input, o.invert, o.canvas);
    const Axis axis = smooth_axis(extract_central_axis(img), o.window);
    const BendAnalysis bend = find_bending_point(axis);
    GrayImage out = stitch_straighten(img, bend);
    save_image(out, (fs::path(o.out) / "baseline.png").string());
    write_manifest(o.out, "baseline",
                   {{"input", o.input},
                    {"bend_row", fmt(bend.bend_row)},
                    {"bend_angle_deg", fmt(bend.bend_angle_deg)}});
}

void run_synth(const Options& o) {
    fs::create_directories(o.out);
    SynthCase c = make_synth_case(o.canvas, o.length, o.curvature, o.bends, o.seed);
    save_image(c.straight, (fs::path(o.out) / "straight.png").string());
    save_image(c.bent, (fs::path(o.out) / "bent.png").string());
    std::ofstream profile(fs::path(o.out) / "profile.txt");
    for (double v : c.profile.samples) profile << v << "\n";
    write_manifest(o.out, "synth",
                   {{"canvas", fmt(o.canvas)},
                    {"length", fmt(o.length)},
                    {"curvature", fmt(o.curvature)},
                    {"bends", fmt(o.bends)},
                    {"seed", std::to_string(o.seed)}});
}

// Case directory layout: <cases>/<case_name>/ground_truth.png plus one
// method_<name>.png per straightening method.
void run_eval(const Options& o) {
    fs::create_directories(o.out);
    std::vector<EvalCase> cases;
    std::vector<fs::path> dirs;
    for (const auto& entry : fs::directory_iterator(o.cases))
        if (entry.is_directory()) dirs.push_back(entry.path());
    std::sort(dirs.begin(), dirs.end());
    for (const fs::path& dir : dirs) {
        if (!fs::exists(dir / "ground_truth.png")) continue;
        EvalCase c;
        c.name = dir.filename().string();
        c.ground_truth = load_image((dir / "ground_truth.png").string());
        std::vector<fs::path> methods;
        for (const auto& f : fs::directory_iterator(dir))
            if (f.path().filename().string().rfind("method_", 0) == 0) methods.push_back(f.path());
        std::sort(methods.begin(), methods.end());
        for (const fs::path& m : methods)
            c.outputs.emplace_back(m.stem().string().substr(7), load_image(m.string()));
        if (!c.outputs.empty()) cases.push_back(std::move(c));
    }
    MetricsReport report = evaluate_methods(cases);
    std::ofstream(fs::path(o.out) / "report.txt") << report.table();
    std::ofstream(fs::path(o.out) / "report.csv") << report.csv();
    write_manifest(o.out, "eval", {{"cases", o.cases}});
    std::cerr << report.table();
}

void run_pipeline(const Options& o) {
    fs::create_directories(o.out);
    const fs::path root(o.out);

    std::cerr << "[1/4] backbone extraction\n";
    GrayImage img = load_image(o.input, o.invert, o.canvas);
    const Axis axis = smooth_axis(extract_central_axis(img), o.window);
    const ControlPoints cp = make_control_points(axis);
    GrayImage curved = rasterize_backbone(cp, img.width, o.stick_width);
    GrayImage vertical = make_vertical_backbone(cp, img.width, o.stick_width);
    fs::create_directories(root / "backbone");
    save_image(img, (root / "backbone" / "chromosome.png").string());
    save_image(curved, (root / "backbone" / "curved.png").string());
    save_image(vertical, (root / "backbone" / "vertical.png").string());
    std::ofstream(root / "backbone" / "control_points.txt") << control_points_table(cp);

    std::cerr << "[2/4] augmentation (" << o.k << " pairs)\n";
    AugmentedDataset ds =
        build_augmented_dataset(img, curved, o.k, o.seed, o.points, o.sigma, o.angle);
    save_dataset(ds, (root / "dataset").string());

    std::cerr << "[3/4] training (" << o.mode << ")\n";
    fs::create_directories(root / "train");
    std::ofstream log(root / "train" / "train_log.txt");
    TrainOutput result = train(ds, to_train_config(o), &log);
    save_checkpoint(result.checkpoint, (root / "train" / "checkpoint.ckpt").string());
    std::cerr << "      " << result.steps << " steps, best validation L1 " << result.best_val
              << "\n";

    std::cerr << "[4/4] straightening\n";
    GrayImage straightened = straighten(result.checkpoint, vertical);
    save_image(straightened, (root / "straightened.png").string());

    bool baseline_ok = false;
    try {
        GrayImage base = stitch_straighten(img, find_bending_point(axis));
        save_image(base, (root / "baseline.png").string());
        baseline_ok = true;
    } catch (const DataError& e) {
        std::cerr << "baseline skipped: " << e.what() << "\n";
    }

    if (!o.ground_truth.empty()) {
        EvalCase c;
        c.name = fs::path(o.input).stem().string();
        c.ground_truth = load_image(o.ground_truth);
        c.outputs.emplace_back("framework", straightened);
        if (baseline_ok)
            c.outputs.emplace_back("geometric", load_image((root / "baseline.png").string()));
        MetricsReport report = evaluate_methods({c});
        std::ofstream(root / "report.txt") << report.table();
        std::ofstream(root / "report.csv") << report.csv();
        std::cerr << report.table();
    }

    auto kv = train_kv(o);
    kv.insert(kv.end(), {{"input", o.input},
                         {"canvas", fmt(o.canvas)},
                         {"k", fmt(o.k)},
                         {"points", fmt(o.points)},
                         {"sigma", fmt(o.sigma)},
                         {"angle", fmt(o.angle)},
                         {"window", fmt(o.window)},
                         {"width", fmt(o.stick_width)},
                         {"ground_truth", o.ground_truth}});
    write_manifest(o.out, "pipeline", kv);
}

void add_train_options(CLI::App* cmd, Options& o) {
    cmd->add_option("--mode", o.mode, "unet or pix2pix")->check(CLI::IsMember({"unet", "pix2pix"}));
    cmd->add_option("--lr", o.lr, "initial learning rate");
    cmd->add_option("--lambda", o.lambda, "L1 weight in the combined objective");
    cmd->add_option("--batch", o.batch, "batch size");
    cmd->add_option("--checks", o.checks, "validation checks per epoch");
    cmd->add_option("--decay-patience", o.decay_patience, "stale checks before each LR decay");
    cmd->add_option("--decay", o.decay, "LR decay factor");
    cmd->add_option("--stop-patience", o.stop_patience, "stale checks before termination");
    cmd->add_option("--max-epochs", o.max_epochs, "epoch cap");
    cmd->add_option("--max-steps", o.max_steps, "update-step cap (0 = none)");
    cmd->add_option("--depth", o.depth, "generator levels");
    cmd->add_option("--base", o.base, "base channel count");
    cmd->add_option("--dropout", o.dropout, "decoder dropout rate (the noise source)");
}

// Flat key=value configuration: each key names a long option of the chosen
// subcommand. Command-line flags override config entries, which override
// defaults. Unknown keys are rejected by name.
void expand_config(std::vector<std::string>& args, CLI::App& app) {
    std::string config_path;
    for (size_t i = 0; i < args.size();) {
        if (args[i] == "--config" && i + 1 < args.size()) {
            config_path = args[i + 1];
            args.erase(args.begin() + i, args.begin() + i + 2);
        } else if (args[i].rfind("--config=", 0) == 0) {
            config_path = args[i].substr(9);
            args.erase(args.begin() + i);
        } else {
            ++i;
        }
    }
    if (config_path.empty()) return;

    size_t sub_pos = 0;
    while (sub_pos < args.size() && args[sub_pos].rfind("-", 0) == 0) ++sub_pos;
    if (sub_pos == args.size()) throw CLI::RequiredError("subcommand");
    CLI::App* sub = app.get_subcommand_no_throw(args[sub_pos]);
    if (!sub) throw CLI::RequiredError("subcommand");

    std::ifstream in(config_path);
    if (!in) throw DataError("cannot open config file: " + config_path);
    std::vector<std::string> injected;
    std::string line;
    while (std::getline(in, line)) {
        while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) line.pop_back();
        if (line.empty() || line[0] == '#') continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw CLI::ValidationError("config", "malformed line (expected key=value): " + line);
        const std::string key = line.substr(0, eq);
        const std::string value = line.substr(eq + 1);
        const std::string flag = "--" + key;
        if (!sub->get_option_no_throw(flag))
            throw CLI::ValidationError("config", "unknown config key: " + key);
        bool overridden = false;
        for (size_t i = sub_pos + 1; i < args.size() && !overridden; ++i)
            overridden = args[i] == flag || args[i].rfind(flag + "=", 0) == 0;
        if (!overridden) injected.push_back(flag + "=" + value);
    }
    args.insert(args.begin() + sub_pos + 1, injected.begin(), injected.end());
}

}  // namespace

int main(int argc, char** argv) {
    if (const char* threads = std::getenv("STRAIGHTKIT_THREADS")) {
        const int n = std::atoi(threads);
        if (n > 0) omp_set_num_threads(n);
    }

    CLI::App app{"chromosome straightening toolkit"};
    app.require_subcommand(1);
    Options o;
    std::string config_path_help;

    auto configure = [&](CLI::App* cmd) {
        cmd->add_option("--config", config_path_help, "flat key=value configuration file");
        cmd->add_option("--seed", o.seed, "master random seed");
        return cmd;
    };

    auto* bb = configure(app.add_subcommand("backbone", "extract curved + vertical backbones"));
    bb->add_option("--input", o.input, "chromosome image (PNG or PGM)")->required();
    bb->add_option("--out", o.out, "output directory")->required();
    bb->add_flag("--invert", o.invert, "invert intensities on load");
    bb->add_option("--canvas", o.canvas, "square canvas size (0 = keep)");
    bb->add_option("--window", o.window, "moving-average window");
    bb->add_option("--width", o.stick_width, "stick width in pixels");
    bb->callback([&] { run_backbone(o); });

    auto* au = configure(app.add_subcommand("augment", "build the single-image training set"));
    au->add_option("--input", o.input, "preprocessed chromosome image")->required();
    au->add_option("--backbone", o.backbone_path, "curved backbone image")->required();
    au->add_option("--out", o.out, "dataset directory")->required();
    au->add_option("--k", o.k, "number of augmented pairs");
    au->add_option("--points", o.points, "deformation grid points per axis");
    au->add_option("--sigma", o.sigma, "deformation displacement sigma (pixels)");
    au->add_option("--angle", o.angle, "rotation range in degrees");
    au->callback([&] { run_augment(o); });

    auto* tr = configure(app.add_subcommand("train", "train the translator on a dataset"));
    tr->add_option("--dataset", o.dataset, "dataset directory")->required();
    tr->add_option("--out", o.out, "output directory")->required();
    add_train_options(tr, o);
    tr->callback([&] { run_train(o); });

    auto* st = configure(app.add_subcommand("straighten", "synthesize from a vertical backbone"));
    st->add_option("--checkpoint", o.checkpoint, "trained checkpoint")->required();
    st->add_option("--backbone", o.backbone_path, "backbone image to condition on")->required();
    st->add_option("--out", o.out, "output directory")->required();
    st->callback([&] { run_straighten(o); });

    auto* ba = configure(app.add_subcommand("baseline", "geometric cut-rotate-stitch method"));
    ba->add_option("--input", o.input, "chromosome image")->required();
    ba->add_option("--out", o.out, "output directory")->required();
    ba->add_flag("--invert", o.invert, "invert intensities on load");
    ba->add_option("--canvas", o.canvas, "square canvas size (0 = keep)");
    ba->add_option("--window", o.window, "moving-average window");
    ba->callback([&] { run_baseline(o); });

    auto* sy = configure(app.add_subcommand("synth", "generate a synthetic oracle pair"));
    sy->add_option("--out", o.out, "output directory")->required();
    sy->add_option("--canvas", o.canvas, "canvas size");
    sy->add_option("--length", o.length, "body length in pixels");
    sy->add_option("--curvature", o.curvature, "spine control offset in pixels");
    sy->add_option("--bends", o.bends, "1 (C shape) or 2 (S shape)")->check(CLI::Range(1, 2));
    sy->callback([&] { run_synth(o); });

    auto* ev = configure(app.add_subcommand("eval", "score method outputs against ground truth"));
    ev->add_option("--cases", o.cases, "directory of case subdirectories")->required();
    ev->add_option("--out", o.out, "output directory")->required();
    ev->callback([&] { run_eval(o); });

    auto* pl =
        configure(app.add_subcommand("pipeline", "backbone -> augment -> train -> straighten"));
    pl->add_option("--input", o.input, "curved chromosome image")->required();
    pl->add_option("--out", o.out, "output directory")->required();
    pl->add_option("--gt", o.ground_truth, "known straight ground truth (enables the report)");
    pl->add_flag("--invert", o.invert, "invert intensities on load");
    pl->add_option("--canvas", o.canvas, "square canvas size (0 = keep)");
    pl->add_option("--window", o.window, "moving-average window");
    pl->add_option("--width", o.stick_width, "stick width in pixels");
    pl->add_option("--k", o.k, "number of augmented pairs");
    pl->add_option("--points", o.points, "deformation grid points per axis");
    pl->add_option("--sigma", o.sigma, "deformation displacement sigma (pixels)");
    pl->add_option("--angle", o.angle, "rotation range in degrees");
    add_train_options(pl, o);
    pl->callback([&] { run_pipeline(o); });

    try {
        std::vector<std::string> args(argv + 1, argv + argc);
        expand_config(args, app);
        std::reverse(args.begin(), args.end());
        app.parse(args);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    } catch (const TrainAbort& e) {
        std::cerr << "training abort: " << e.what() << "\n";
        return 4;
    } catch (const DataError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
    return 0;
}
