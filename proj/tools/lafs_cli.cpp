// lafs: synthetic scenes, map decoding, evaluation and diagnostics for the
// location-aware feature selection pipeline.
//
// Exit codes: 0 success, 2 config error, 3 data error.

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "lafs/decode.hpp"
#include "lafs/eval.hpp"
#include "lafs/gradcheck_suite.hpp"
#include "lafs/io.hpp"
#include "lafs/svg.hpp"
#include "lafs/synth.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr const char* kToolVersion = "0.1.0";
constexpr int kExitConfig = 2;
constexpr int kExitData = 3;

std::uint64_t fnv1a(const std::string& bytes) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    return h;
}

std::string hex64(std::uint64_t v) {
    char buf[20];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

class StageTimer {
public:
    void start(const std::string& stage) {
        stage_ = stage;
        t0_ = std::chrono::steady_clock::now();
    }
    void stop() {
        const auto t1 = std::chrono::steady_clock::now();
        timings_[stage_] =
            std::chrono::duration_cast<std::chrono::milliseconds>(t1 - t0_).count();
    }
    json to_json() const {
        json j = json::object();
        for (const auto& [k, v] : timings_) j[k] = v;
        return j;
    }

private:
    std::string stage_;
    std::chrono::steady_clock::time_point t0_;
    std::map<std::string, long long> timings_;
};

// Written via a temp file + rename so a crash never leaves a torn manifest.
void write_manifest(const fs::path& path, const json& body) {
    const fs::path tmp = path.string() + ".tmp";
    {
        std::ofstream os(tmp);
        os << body.dump(2) << "\n";
    }
    fs::rename(tmp, path);
}

json read_json_file(const fs::path& path) {
    std::ifstream is(path);
    if (!is) throw std::invalid_argument("cannot open " + path.string());
    json j;
    is >> j;
    return j;
}

int resolve_threads(int flag_value) {
    if (const char* env = std::getenv("LAFS_THREADS")) {
        try {
            return std::max(1, std::stoi(env));
        } catch (...) {
            throw std::invalid_argument("LAFS_THREADS is not an integer");
        }
    }
    return std::max(1, flag_value);
}

lafs::DecodeMode parse_mode(const std::string& mode) {
    if (mode == "lafs") return lafs::DecodeMode::lafs;
    if (mode == "baseline") return lafs::DecodeMode::baseline;
    if (mode == "constrained") return lafs::DecodeMode::constrained;
    throw std::invalid_argument("unknown mode '" + mode + "'");
}

int cmd_synth(const std::string& config_path, const std::string& out_dir) {
    json config;
    lafs::SceneConfig scene;
    lafs::NoiseConfig noise;
    float shrink = 0.3f;
    std::string config_text;
    try {
        std::ifstream is(config_path);
        if (!is) throw std::invalid_argument("cannot open " + config_path);
        config_text.assign(std::istreambuf_iterator<char>(is), {});
        config = json::parse(config_text);
        if (config.contains("scene")) scene = lafs::scene_config_from_json(config["scene"]);
        if (config.contains("noise")) noise = lafs::noise_config_from_json(config["noise"]);
        shrink = config.value("shrink_ratio", shrink);
    } catch (const std::exception& e) {
        std::cerr << "lafs synth: config error: " << e.what() << "\n";
        return kExitConfig;
    }

    try {
        fs::create_directories(out_dir);
        StageTimer timer;
        timer.start("generate_scene");
        const std::vector<lafs::RotatedBox> boxes = lafs::generate_scene(scene);
        timer.stop();
        timer.start("simulate_predictions");
        const lafs::Simulated sim = lafs::simulate_predictions(
            boxes, noise, scene.height, scene.width, shrink);
        timer.stop();

        timer.start("write");
        const fs::path dir(out_dir);
        lafs::write_boxes(boxes, dir / "boxes.json");
        lafs::write_map(sim.score, dir / "score.lmap");
        lafs::write_map(sim.geo_gt, dir / "geo_gt.lmap");
        lafs::write_map(sim.geo_pred, dir / "geo_pred.lmap");
        lafs::write_map(sim.conf, dir / "conf.lmap");
        lafs::write_map(sim.conf_oracle, dir / "conf_oracle.lmap");
        timer.stop();

        write_manifest(dir / "manifest.json",
                       {{"tool_version", kToolVersion},
                        {"command", "synth"},
                        {"config_hash", hex64(fnv1a(config_text))},
                        {"seeds", {{"scene", scene.seed}, {"noise", noise.seed}}},
                        {"inputs", {config_path}},
                        {"outputs",
                         {"boxes.json", "score.lmap", "geo_gt.lmap",
                          "geo_pred.lmap", "conf.lmap", "conf_oracle.lmap"}},
                        {"timing_ms", timer.to_json()}});
        return 0;
    } catch (const std::exception& e) {
        std::cerr << "lafs synth: " << e.what() << "\n";
        return kExitData;
    }
}

int cmd_decode(const std::string& maps_dir, const std::string& out_path,
               const lafs::DecodeParams& params, int threads) {
    try {
        const fs::path dir(maps_dir);
        StageTimer timer;
        timer.start("read");
        const lafs::DenseMap score = lafs::read_map(dir / "score.lmap");
        const lafs::DenseMap geo = lafs::read_map(dir / "geo_pred.lmap");
        const lafs::DenseMap conf = lafs::read_map(dir / "conf.lmap");
        timer.stop();

        timer.start("decode");
        const lafs::DecodeResult result =
            lafs::decode(score, geo, conf, params, threads);
        timer.stop();

        lafs::write_boxes(result.boxes, out_path);
        write_manifest(fs::path(out_path).replace_extension(".manifest.json"),
                       {{"tool_version", kToolVersion},
                        {"command", "decode"},
                        {"inputs", {maps_dir}},
                        {"outputs", {out_path}},
                        {"boxes", result.boxes.size()},
                        {"discarded_groups", result.discarded},
                        {"timing_ms", timer.to_json()}});
        return 0;
    } catch (const std::exception& e) {
        std::cerr << "lafs decode: " << e.what() << "\n";
        return kExitData;
    }
}

int cmd_eval(const std::string& pred_path, const std::string& gt_path,
             const std::string& thresholds_arg, const std::string& out_path) {
    std::vector<float> thresholds;
    try {
        std::stringstream ss(thresholds_arg);
        std::string tok;
        while (std::getline(ss, tok, ',')) {
            const float t = std::stof(tok);
            if (t <= 0.0f || t >= 1.0f)
                throw std::invalid_argument("threshold out of (0,1): " + tok);
            thresholds.push_back(t);
        }
        if (thresholds.empty()) throw std::invalid_argument("no thresholds given");
    } catch (const std::exception& e) {
        std::cerr << "lafs eval: config error: " << e.what() << "\n";
        return kExitConfig;
    }

    try {
        const std::vector<lafs::RotatedBox> preds = lafs::read_boxes(pred_path);
        const std::vector<lafs::RotatedBox> gts = lafs::read_boxes(gt_path);
        const json j = lafs::report_to_json(lafs::report(preds, gts, thresholds));
        if (out_path.empty()) {
            std::cout << j.dump(2) << "\n";
        } else {
            std::ofstream os(out_path);
            os << j.dump(2) << "\n";
        }
        return 0;
    } catch (const std::exception& e) {
        std::cerr << "lafs eval: " << e.what() << "\n";
        return kExitData;
    }
}

int cmd_stats(const std::string& conf_path, const std::string& score_path,
              const std::string& boxes_path, const std::string& out_path,
              const std::string& csv_path) {
    try {
        const lafs::DenseMap conf = lafs::read_map(conf_path);
        const lafs::DenseMap score = lafs::read_map(score_path);
        const std::vector<lafs::RotatedBox> boxes = lafs::read_boxes(boxes_path);
        const lafs::LocationHistogram hist =
            lafs::feature_location_stats(boxes, conf, score);
        const json j = lafs::histogram_to_json(hist);
        if (out_path.empty()) {
            std::cout << j.dump() << "\n";
        } else {
            std::ofstream os(out_path);
            os << j.dump() << "\n";
        }
        if (!csv_path.empty()) {
            std::ofstream os(csv_path);
            os << lafs::histogram_to_csv(hist);
        }
        return 0;
    } catch (const std::exception& e) {
        std::cerr << "lafs stats: " << e.what() << "\n";
        return kExitData;
    }
}

int cmd_gradcheck(std::uint64_t seed, int points) {
    const double tol = 1e-4;
    bool all_pass = true;
    std::printf("%-10s %-8s %-14s %s\n", "loss", "points", "max_rel_err", "status");
    for (const lafs::GradCheckResult& r : lafs::run_gradcheck_suite(seed, points)) {
        const bool pass = r.max_rel_error < tol;
        all_pass = all_pass && pass;
        std::printf("%-10s %-8d %-14.3e %s\n", r.loss.c_str(), r.points,
                    r.max_rel_error, pass ? "pass" : "FAIL");
    }
    return all_pass ? 0 : 1;
}

int cmd_render(const std::vector<std::string>& box_files,
               const std::string& out_path, int width, int height) {
    try {
        std::vector<std::vector<lafs::RotatedBox>> sets;
        for (const std::string& f : box_files) sets.push_back(lafs::read_boxes(f));
        std::ofstream os(out_path);
        if (!os) throw std::invalid_argument("cannot open " + out_path);
        os << lafs::render_svg(sets, width, height);
        return 0;
    } catch (const std::exception& e) {
        std::cerr << "lafs render: " << e.what() << "\n";
        return kExitData;
    }
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"LAFS rotated-text-box decoding pipeline"};
    app.require_subcommand(1);
    app.set_version_flag("--version", kToolVersion);

    // synth
    std::string synth_config, synth_out;
    CLI::App* synth = app.add_subcommand("synth", "Generate a synthetic scene and its maps");
    synth->add_option("config", synth_config, "JSON config file")->required();
    synth->add_option("-o,--out", synth_out, "output directory")->required();

    // decode
    std::string decode_dir, decode_out = "boxes.json", decode_mode = "lafs";
    lafs::DecodeParams params;
    int threads = 1;
    CLI::App* decode = app.add_subcommand("decode", "Decode maps into boxes");
    decode->add_option("maps", decode_dir, "directory with score/geo_pred/conf LMAP files")
        ->required();
    decode->add_option("-o,--out", decode_out, "output boxes JSON");
    decode->add_option("--mode", decode_mode, "lafs | baseline | constrained");
    decode->add_option("--k", params.k, "top-K components per channel");
    decode->add_option("--score-thresh", params.score_thresh, "candidate score threshold");
    decode->add_option("--group-iou", params.group_iou_thresh, "grouping IoU threshold");
    decode->add_option("--constraint-ratio", params.constraint_ratio,
                       "neighbor-area ratio (constrained mode)");
    decode->add_option("--threads", threads, "merge worker threads");

    // eval
    std::string eval_pred, eval_gt, eval_thresh = "0.5,0.6,0.7,0.8", eval_out;
    CLI::App* eval = app.add_subcommand("eval", "Recall/Precision/Hmean at IoU thresholds");
    eval->add_option("pred", eval_pred, "predicted boxes JSON")->required();
    eval->add_option("gt", eval_gt, "ground-truth boxes JSON")->required();
    eval->add_option("--thresholds", eval_thresh, "comma-separated IoU thresholds");
    eval->add_option("-o,--out", eval_out, "report JSON (default: stdout)");

    // stats
    std::string stats_conf, stats_score, stats_boxes, stats_out, stats_csv;
    CLI::App* stats = app.add_subcommand("stats", "Best-feature-location histogram");
    stats->add_option("--conf", stats_conf, "confidence LMAP")->required();
    stats->add_option("--score", stats_score, "score LMAP (mask)")->required();
    stats->add_option("--boxes", stats_boxes, "instance boxes JSON")->required();
    stats->add_option("-o,--out", stats_out, "histogram JSON (default: stdout)");
    stats->add_option("--csv", stats_csv, "also write CSV here");

    // gradcheck
    std::uint64_t gc_seed = 42;
    int gc_points = 100;
    CLI::App* gradcheck = app.add_subcommand("gradcheck", "Verify loss gradients");
    gradcheck->add_option("--seed", gc_seed, "RNG seed");
    gradcheck->add_option("--points", gc_points, "evaluation points per loss");

    // render
    std::vector<std::string> render_files;
    std::string render_out;
    int render_w = 256, render_h = 256;
    CLI::App* render = app.add_subcommand("render", "SVG overlay of box files");
    render->add_option("boxes", render_files, "boxes JSON files")->required();
    render->add_option("-o,--out", render_out, "output SVG")->required();
    render->add_option("--width", render_w, "canvas width");
    render->add_option("--height", render_h, "canvas height");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*synth) return cmd_synth(synth_config, synth_out);
        if (*decode) {
            params.mode = parse_mode(decode_mode);
            if (params.k < 1 || params.score_thresh <= 0.0f ||
                params.score_thresh >= 1.0f || params.group_iou_thresh <= 0.0f ||
                params.group_iou_thresh >= 1.0f) {
                std::cerr << "lafs decode: config error: bad parameters\n";
                return kExitConfig;
            }
            return cmd_decode(decode_dir, decode_out, params, resolve_threads(threads));
        }
        if (*eval) return cmd_eval(eval_pred, eval_gt, eval_thresh, eval_out);
        if (*stats) return cmd_stats(stats_conf, stats_score, stats_boxes, stats_out, stats_csv);
        if (*gradcheck) return cmd_gradcheck(gc_seed, gc_points);
        if (*render) return cmd_render(render_files, render_out, render_w, render_h);
    } catch (const std::invalid_argument& e) {
        std::cerr << "lafs: config error: " << e.what() << "\n";
        return kExitConfig;
    }
    return 0;
}
