#include "sra/agent.hpp"
#include "sra/benchgen.hpp"
#include "sra/knowledge.hpp"
#include "sra/metrics.hpp"
#include "sra/perception.hpp"
#include "sra/remote.hpp"
#include "sra/scripted.hpp"

#include <CLI11.hpp>
#include <omp.h>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>

namespace fs = std::filesystem;
using sra::OJson;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitInput = 2;
constexpr int kExitInternal = 3;

void emit_error(int code, const std::string& message) {
    OJson err;
    err["error"] = message;
    err["exit_code"] = code;
    std::cerr << err.dump() << "\n";
}

/// Config file keys are long option names; values from the file apply only
/// when the flag is absent on the command line (flags win).
std::vector<std::string> merge_config_args(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    std::string config_path;
    for (std::size_t i = 0; i + 1 < args.size(); ++i)
        if (args[i] == "--config") config_path = args[i + 1];
    if (config_path.empty()) return args;

    std::ifstream in(config_path);
    if (!in) throw std::runtime_error("cannot open config file: " + config_path);
    nlohmann::json config;
    in >> config;
    if (!config.is_object())
        throw std::runtime_error("config file must hold one JSON object");

    for (const auto& [key, value] : config.items()) {
        std::string flag = "--" + key;
        if (std::find(args.begin(), args.end(), flag) != args.end()) continue;
        args.push_back(flag);
        if (value.is_boolean()) {
            if (!value.get<bool>()) args.pop_back();
            continue;
        }
        args.push_back(value.is_string() ? value.get<std::string>() : value.dump());
    }
    return args;
}

struct NoiseFlags {
    double center_sigma = 0.0;
    double box_jitter = 0.0;
    double miss_rate = 0.0;
    double false_positive_rate = 0.0;

    sra::NoiseModel model() const {
        sra::NoiseModel m;
        m.center_sigma = center_sigma;
        m.box_jitter_sigma = box_jitter;
        m.miss_rate = miss_rate;
        m.false_positive_rate = false_positive_rate;
        m.validate();
        return m;
    }
};

std::vector<std::string> scene_vocabulary(const sra::SceneSpec& scene) {
    std::set<std::string> cats;
    for (const auto& obj : scene.objects) cats.insert(obj.category);
    return {cats.begin(), cats.end()};
}

std::vector<fs::path> scene_files(const std::string& path) {
    std::vector<fs::path> files;
    if (fs::is_directory(path)) {
        for (const auto& entry : fs::directory_iterator(path))
            if (entry.path().extension() == ".json") files.push_back(entry.path());
        std::sort(files.begin(), files.end());
    } else {
        files.push_back(path);
    }
    if (files.empty()) throw std::runtime_error("no scene files under " + path);
    return files;
}

int cmd_gen_scene(std::uint64_t seed, const std::string& out_dir, int count,
                  const sra::GenConfig& config) {
    fs::create_directories(out_dir);
    for (int i = 0; i < count; ++i) {
        std::uint64_t scene_seed = seed + static_cast<std::uint64_t>(i);
        sra::SceneSpec scene = sra::generate_scene(config, scene_seed);
        fs::path path = fs::path(out_dir) / (scene.scene_id + ".json");
        scene.save(path.string());
        std::cout << path.string() << "\n";
    }
    return kExitOk;
}

int cmd_gen_bench(std::uint64_t seed, const std::string& scenes,
                  const std::string& out_path, const std::string& families_csv,
                  int per_family, const std::string& cogmap_dir) {
    std::vector<sra::QuestionFamily> families;
    std::stringstream ss(families_csv);
    std::string token;
    while (std::getline(ss, token, ','))
        if (!token.empty()) families.push_back(sra::family_from_string(token));
    if (families.empty()) throw std::runtime_error("no question families requested");

    std::vector<sra::Question> all;
    for (const auto& file : scene_files(scenes)) {
        sra::SceneSpec scene = sra::SceneSpec::load(file.string());
        for (sra::QuestionFamily family : families) {
            auto questions = sra::generate_questions(scene, family, per_family, seed);
            all.insert(all.end(), questions.begin(), questions.end());
        }
        if (!cogmap_dir.empty()) {
            fs::create_directories(cogmap_dir);
            fs::path map_path = fs::path(cogmap_dir) / (scene.scene_id + ".cogmap.json");
            std::ofstream out(map_path);
            out << sra::cognitive_map(scene).to_json().dump(2) << "\n";
        }
    }
    std::sort(all.begin(), all.end(), [](const sra::Question& a, const sra::Question& b) {
        return a.question_id < b.question_id;
    });
    sra::save_questions(all, out_path);
    std::cout << "wrote " << all.size() << " questions to " << out_path << "\n";
    return kExitOk;
}

int cmd_run(std::uint64_t seed, const std::string& scenes, const std::string& questions_path,
            const std::string& out_dir, const NoiseFlags& noise, int budget, bool timings,
            int workers, double epsilon, const std::string& knowledge_path,
            bool knowledge_explicit, const std::string& remote_cmd,
            const std::string& prompts_dir) {
    auto questions = sra::load_questions(questions_path);
    if (questions.empty()) throw std::runtime_error("question file is empty");
    std::sort(questions.begin(), questions.end(),
              [](const sra::Question& a, const sra::Question& b) {
                  return a.question_id < b.question_id;
              });

    std::map<std::string, sra::SceneSpec> scenes_by_id;
    for (const auto& file : scene_files(scenes)) {
        sra::SceneSpec scene = sra::SceneSpec::load(file.string());
        scenes_by_id[scene.scene_id] = std::move(scene);
    }
    for (const auto& q : questions)
        if (!scenes_by_id.count(q.scene_id))
            throw std::runtime_error("question " + q.question_id +
                                     " references unknown scene " + q.scene_id);

    auto knowledge = std::make_shared<sra::KnowledgeStore>();
    if (fs::exists(knowledge_path))
        *knowledge = sra::KnowledgeStore::load(knowledge_path);
    else if (knowledge_explicit)
        throw std::runtime_error("knowledge file not found: " + knowledge_path);

    fs::create_directories(fs::path(out_dir) / "traces");
    sra::NoiseModel noise_model = noise.model();
    sra::SamplingPolicy policy;
    sra::ToolsetConfig toolset;
    toolset.cluster_epsilon = epsilon;

    if (workers > 0) omp_set_num_threads(workers);
    std::vector<sra::PredictionRecord> predictions(questions.size());
    std::vector<std::string> errors(questions.size());

#pragma omp parallel for schedule(dynamic)
    for (std::size_t i = 0; i < questions.size(); ++i) {
        const sra::Question& q = questions[i];
        try {
            sra::SceneSpec scene = scenes_by_id.at(q.scene_id);
            scene.rng_seed = sra::hash_id(q.question_id) ^ scene.rng_seed ^ seed;
            std::string video_path = q.scene_id + ".json";
            auto provider =
                std::make_shared<sra::OracleProvider>(scene, policy, noise_model);
            sra::ToolRegistry registry =
                sra::build_oracle_registry(provider, knowledge, video_path, toolset);
            sra::RoleBackends backends;
            if (remote_cmd.empty()) {
                backends = sra::make_scripted_backends(
                    scene_vocabulary(scenes_by_id.at(q.scene_id)), video_path);
            } else {
                std::vector<std::string> argv;
                std::stringstream cmd(remote_cmd);
                std::string part;
                while (cmd >> part) argv.push_back(part);
                auto timeout = std::chrono::milliseconds(60000);
                if (const char* env = std::getenv("SRA_REMOTE_TIMEOUT_MS"))
                    timeout = std::chrono::milliseconds(std::stoll(env));
                auto process = std::make_shared<sra::RemoteProcess>(argv, timeout);
                backends = sra::make_remote_backends(process,
                                                     sra::RolePrompts::load(prompts_dir));
            }
            sra::AgentRun run = sra::run_agent(q.rendered(), registry, backends, budget);
            fs::path trace_path = fs::path(out_dir) / "traces" / (q.question_id + ".json");
            {
                std::ofstream out(trace_path);
                out << sra::trace_to_json(run, timings).dump(2) << "\n";
            }
            predictions[i] = {q.question_id, run.final_answer, trace_path.string()};
        } catch (const std::exception& e) {
            errors[i] = e.what();
            predictions[i] = {q.question_id, sra::kSentinelAnswer, ""};
        }
    }

    for (std::size_t i = 0; i < questions.size(); ++i)
        if (!errors[i].empty())
            std::cerr << "run failed for " << questions[i].question_id << ": "
                      << errors[i] << "\n";

    fs::path pred_path = fs::path(out_dir) / "predictions.jsonl";
    sra::save_predictions(predictions, pred_path.string());
    std::cout << "wrote " << predictions.size() << " predictions to "
              << pred_path.string() << "\n";
    return kExitOk;
}

int cmd_eval(const std::string& questions_path, const std::string& predictions_path,
             const std::string& out_path) {
    auto questions = sra::load_questions(questions_path);
    auto predictions = sra::load_predictions(predictions_path);
    if (predictions.empty()) throw std::runtime_error("prediction file is empty");

    std::vector<sra::QuestionKeyView> keys;
    for (const auto& q : questions)
        keys.push_back(
            {q.question_id, sra::to_string(q.kind), q.answer_type, q.ground_truth});
    sra::EvalReport report = sra::evaluate(keys, predictions);
    std::cout << report.table();
    if (!out_path.empty()) {
        std::ofstream out(out_path);
        out << report.to_json().dump(2) << "\n";
    }
    return kExitOk;
}

int cmd_trace(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open trace file: " + path);
    nlohmann::json trace;
    in >> trace;
    std::cout << "question: " << trace.value("question", "") << "\n";
    if (trace.contains("plan"))
        std::cout << "plan: " << trace["plan"].dump() << "\n";
    int step = 0;
    for (const auto& entry : trace.value("chain", nlohmann::json::array())) {
        std::cout << "\n[" << ++step << "] "
                  << entry.at("call").at("tool").get<std::string>() << "\n";
        std::cout << "    args: " << entry.at("call").at("args").dump() << "\n";
        std::cout << "    interpretation: "
                  << entry.value("interpretation", "") << "\n";
    }
    std::cout << "\nsummary: " << trace.value("summary", "") << "\n";
    std::cout << "final_answer: " << trace.value("final_answer", "") << "\n";
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{
        "Spatial-reasoning agent toolkit: synthetic scenes, question generation, "
        "agent runs, and evaluation.\n\n"
        "Environment overrides:\n"
        "  SRA_REMOTE_CMD         command line for the remote role backend\n"
        "                         (same as --remote-cmd; the flag wins)\n"
        "  SRA_REMOTE_TIMEOUT_MS  remote backend timeout in milliseconds\n\n"
        "A JSON config file (--config) may supply any long option; command-line "
        "flags win."};
    app.require_subcommand(1);

    std::uint64_t seed = 0;
    std::string config_path;
    app.add_option("--seed", seed, "Global RNG seed");
    app.add_option("--config", config_path, "JSON config file with long-option keys");

    auto* gen_scene = app.add_subcommand("gen-scene", "Generate synthetic scenes");
    std::string gs_out = "scenes";
    int gs_count = 1;
    sra::GenConfig gen_config;
    gen_scene->add_option("--out", gs_out, "Output directory");
    gen_scene->add_option("--count", gs_count, "Number of scenes (seeds seed..seed+N-1)");
    gen_scene->add_option("--min-objects", gen_config.min_objects, "Minimum object count");
    gen_scene->add_option("--max-objects", gen_config.max_objects, "Maximum object count");
    gen_scene->add_option("--frames", gen_config.frame_count, "Trajectory frame count");
    gen_scene->add_option("--min-separation", gen_config.min_separation,
                          "Minimum pairwise box gap in scene units");

    auto* gen_bench = app.add_subcommand("gen-bench", "Generate question sets");
    std::string gb_scenes = "scenes", gb_out = "questions.jsonl", gb_cogmaps;
    std::string gb_families =
        "object_count,relative_distance_farthest,relative_direction,"
        "relative_direction_backward,object_obstruction,appearance_order";
    int gb_per_family = 5;
    gen_bench->add_option("--scenes", gb_scenes, "Scene file or directory");
    gen_bench->add_option("--out", gb_out, "Output question file (NDJSON)");
    gen_bench->add_option("--families", gb_families, "Comma-separated question families");
    gen_bench->add_option("--per-family", gb_per_family,
                          "Max questions per family per scene");
    gen_bench->add_option("--cogmaps", gb_cogmaps,
                          "Also write ground-truth cognitive maps to this directory");

    auto* run = app.add_subcommand("run", "Run the agent over a question set");
    std::string r_scenes = "scenes", r_questions = "questions.jsonl", r_out = "runs";
    std::string r_knowledge = "data/knowledge.jsonl", r_remote_cmd, r_prompts = "prompts";
    NoiseFlags r_noise;
    int r_budget = sra::kDefaultBudget, r_workers = 0;
    double r_epsilon = sra::kDefaultClusterEpsilon;
    bool r_timings = false;
    run->add_option("--scenes", r_scenes, "Scene file or directory");
    run->add_option("--questions", r_questions, "Question file (NDJSON)");
    run->add_option("--out", r_out, "Output directory (predictions + traces)");
    run->add_option("--budget", r_budget, "Tool-call budget per question");
    run->add_option("--workers", r_workers, "Worker threads (0 = library default)");
    run->add_option("--epsilon", r_epsilon, "Clustering distance cap");
    auto* knowledge_opt =
        run->add_option("--knowledge", r_knowledge, "Knowledge store (NDJSON)");
    run->add_option("--noise-center", r_noise.center_sigma, "3D center noise sigma");
    run->add_option("--noise-jitter", r_noise.box_jitter, "2D box jitter sigma (pixels)");
    run->add_option("--noise-miss", r_noise.miss_rate, "Detection miss rate");
    run->add_option("--noise-fp", r_noise.false_positive_rate, "False positive rate");
    run->add_flag("--timings", r_timings,
                  "Include wall-clock timings in traces (breaks byte-identity)");
    run->add_option("--remote-cmd", r_remote_cmd,
                    "Command line of a remote role backend (NDJSON over stdio)");
    run->add_option("--prompts", r_prompts, "Role prompt directory for the remote backend");

    auto* eval = app.add_subcommand("eval", "Score predictions against ground truth");
    std::string e_questions = "questions.jsonl", e_predictions, e_out;
    eval->add_option("--questions", e_questions, "Question file (NDJSON)");
    eval->add_option("--predictions", e_predictions, "Prediction file (NDJSON)")
        ->required();
    eval->add_option("--out", e_out, "Write the JSON report here");

    auto* trace = app.add_subcommand("trace", "Pretty-print one trace file");
    std::string t_file;
    trace->add_option("--file", t_file, "Trace JSON file")->required();

    std::vector<std::string> args;
    try {
        args = merge_config_args(argc, argv);
    } catch (const std::exception& e) {
        emit_error(kExitInput, e.what());
        return kExitInput;
    }
    try {
        std::reverse(args.begin(), args.end());  // CLI11 consumes in reverse
        app.parse(args);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? kExitOk : kExitUsage;
    }

    if (r_remote_cmd.empty())
        if (const char* env = std::getenv("SRA_REMOTE_CMD")) r_remote_cmd = env;

    try {
        if (gen_scene->parsed()) return cmd_gen_scene(seed, gs_out, gs_count, gen_config);
        if (gen_bench->parsed())
            return cmd_gen_bench(seed, gb_scenes, gb_out, gb_families, gb_per_family,
                                 gb_cogmaps);
        if (run->parsed())
            return cmd_run(seed, r_scenes, r_questions, r_out, r_noise, r_budget,
                           r_timings, r_workers, r_epsilon, r_knowledge,
                           knowledge_opt->count() > 0, r_remote_cmd, r_prompts);
        if (eval->parsed()) return cmd_eval(e_questions, e_predictions, e_out);
        if (trace->parsed()) return cmd_trace(t_file);
        emit_error(kExitUsage, "no subcommand given");
        return kExitUsage;
    } catch (const std::exception& e) {
        emit_error(kExitInput, e.what());
        return kExitInput;
    } catch (...) {
        emit_error(kExitInternal, "unknown internal error");
        return kExitInternal;
    }
}
