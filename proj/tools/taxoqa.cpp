// Command-line front end: build, taxomps, eval, metrics, analyze, validate-dump, serve-mock.
#include <atomic>
#include <csignal>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <sstream>
#include <thread>

#include "CLI11.hpp"
#include "json.hpp"

#include "taxoqa/digest.hpp"
#include "taxoqa/dump.hpp"
#include "taxoqa/evalclient.hpp"
#include "taxoqa/fileio.hpp"
#include "taxoqa/metrics.hpp"
#include "taxoqa/mockserver.hpp"
#include "taxoqa/pipeline.hpp"
#include "taxoqa/repranalysis.hpp"

using namespace taxoqa;
using namespace taxoqa::analysis;
using nlohmann::json;
using nlohmann::ordered_json;
namespace fs = std::filesystem;

namespace {

std::atomic<bool> g_interrupted{false};

void on_signal(int) { g_interrupted = true; }

void install_signal_handlers() {
    std::signal(SIGINT, on_signal);
    std::signal(SIGTERM, on_signal);
}

void write_json(const fs::path& p, const ordered_json& j) { write_file_atomic(p.string(), j.dump(2) + "\n"); }

void write_text(const fs::path& p, const std::string& s) { write_file_atomic(p.string(), s); }

void ensure_dir(const std::string& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw ConfigError("cannot create output directory '" + dir + "': " + ec.message());
}

void require_path(const std::string& value, const std::string& flag) {
    if (value.empty()) throw ConfigError("missing " + flag);
}

void log(const std::string& msg) { std::cerr << msg << '\n'; }

// Options shared by every subcommand that reads a pipeline config.
struct Common {
    std::string config_path;
    PipelineConfig cfg;

    void load() {
        if (!config_path.empty()) cfg = PipelineConfig::load(config_path);
    }
};

ordered_json seeds_json(const Seeds& s) {
    return {{"dataset", s.dataset}, {"negatives", s.negatives}, {"analysis", s.analysis}};
}

MetricsReport write_metrics(const fs::path& out, const EvalRun& run, const std::vector<QAInstance>& dataset) {
    const auto report = compute_metrics(InstanceSet::build(instance_results(run, dataset)));
    ordered_json j = to_json(report);
    j["provenance"] = {{"run_id", run.run_id}, {"dataset_digest", run.dataset_digest}, {"model", run.model_name},
                       {"mode", to_string(run.mode)}};
    write_json(out / "metrics.json", j);
    write_text(out / "per_depth.csv", breakdown_csv(report.per_depth, "depth"));
    write_text(out / "per_hypernym.csv", breakdown_csv(report.per_hypernym, "hypernym"));
    write_text(out / "per_pair.csv", breakdown_csv(report.per_pair, "pair"));
    return report;
}

std::string fmt_metric(const std::optional<double>& v) {
    if (!v) return "undefined";
    std::ostringstream s;
    s.precision(4);
    s << *v;
    return s.str();
}

// ---- build ---------------------------------------------------------------

struct BuildArgs {
    Common common;
    std::optional<std::uint64_t> seed, dataset_seed, negatives_seed;
    std::string scenes, taxonomy, out;
    std::optional<std::size_t> quota, jobs, max_objects;
};

void cmd_build(BuildArgs& a) {
    a.common.load();
    auto& c = a.common.cfg;
    if (!a.scenes.empty()) c.scenes = a.scenes;
    if (!a.taxonomy.empty()) c.taxonomy = a.taxonomy;
    if (!a.out.empty()) c.out = a.out;
    if (a.seed) c.seeds.dataset = c.seeds.negatives = c.seeds.analysis = *a.seed;
    if (a.dataset_seed) c.seeds.dataset = *a.dataset_seed;
    if (a.negatives_seed) c.seeds.negatives = *a.negatives_seed;
    if (a.quota) c.per_scene_quota = *a.quota;
    if (a.jobs) c.jobs = *a.jobs;
    if (a.max_objects) c.max_objects = *a.max_objects;
    require_path(c.scenes, "--scenes");
    require_path(c.taxonomy, "--taxonomy");
    if (!fs::exists(c.scenes)) throw ConfigError("scene path '" + c.scenes + "' does not exist");
    if (!fs::exists(c.taxonomy)) throw ConfigError("taxonomy '" + c.taxonomy + "' does not exist");
    ensure_dir(c.out);

    const auto taxonomy = Taxonomy::load_file(c.taxonomy);
    const auto scenes = load_scenes(c.scenes);
    BuildOptions opt;
    opt.seeds = c.seeds;
    opt.per_scene_quota = c.per_scene_quota;
    opt.max_objects = c.max_objects;
    opt.resample_per_depth = c.resample_per_depth;
    opt.jobs = c.jobs;
    const auto result = build_dataset(scenes, taxonomy, opt);

    std::ostringstream data;
    write_dataset(data, result.instances);
    const fs::path out(c.out);
    write_text(out / "dataset.jsonl", data.str());

    ordered_json m;
    m["config_digest"] = config_digest(c);
    m["seeds"] = seeds_json(c.seeds);
    m["per_scene_quota"] = c.per_scene_quota;
    m["max_objects"] = c.max_objects;
    m["resample_per_depth"] = c.resample_per_depth;
    m["template_version"] = kTemplateVersion;
    m["dataset"] = "dataset.jsonl";
    m["dataset_sha256"] = sha256_hex(data.str());
    m["counts"] = to_json(result.manifest);
    write_json(out / "manifest.json", m);
    log("built " + std::to_string(result.manifest.n_positive) + " positives (" +
        std::to_string(result.manifest.n_total) + " questions) from " + std::to_string(result.manifest.n_scenes) +
        " scenes into " + c.out);
}

// ---- taxomps -------------------------------------------------------------

struct TaxompsArgs {
    Common common;
    std::string taxonomy, out;
    std::optional<std::uint64_t> seed;
};

void cmd_taxomps(TaxompsArgs& a) {
    a.common.load();
    auto& c = a.common.cfg;
    if (!a.taxonomy.empty()) c.taxonomy = a.taxonomy;
    if (!a.out.empty()) c.out = a.out;
    if (a.seed) c.seeds.negatives = *a.seed;
    require_path(c.taxonomy, "--taxonomy");
    ensure_dir(c.out);
    const auto taxonomy = Taxonomy::load_file(c.taxonomy);
    const auto r = generate_taxomps(taxonomy, c.seeds.negatives);
    std::ostringstream data;
    write_dataset(data, r.instances);
    const fs::path out(c.out);
    write_text(out / "taxomps.jsonl", data.str());
    ordered_json m;
    m["seed"] = c.seeds.negatives;
    m["taxonomy_sha256"] = sha256_file(c.taxonomy);
    m["n_pairs"] = taxonomy.hyponym_hypernym_pairs().size();
    m["n_instances"] = r.instances.size();
    m["n_questions"] = kSlotsPerInstance * r.instances.size();
    m["skipped"] = r.skipped;
    m["dataset_sha256"] = sha256_hex(data.str());
    write_json(out / "taxomps_manifest.json", m);
    log("generated " + std::to_string(kSlotsPerInstance * r.instances.size()) + " minimal-pair questions");
}

// ---- eval ----------------------------------------------------------------

struct EvalArgs {
    Common common;
    std::string dataset, endpoint, model, mode, out, checkpoint, images, system_prompt, decision;
    std::optional<std::size_t> max_in_flight, top_k, retries;
    std::optional<long> timeout_ms;
    std::optional<std::uint64_t> decision_seed;
    bool quiet = false;
};

void cmd_eval(EvalArgs& a) {
    a.common.load();
    auto& c = a.common.cfg;
    auto& ep = c.endpoint;
    if (!a.endpoint.empty()) ep.base_url = a.endpoint;
    if (!a.model.empty()) ep.model_name = a.model;
    if (!a.mode.empty()) c.mode = parse_eval_mode(a.mode);
    if (!a.out.empty()) c.out = a.out;
    if (!a.images.empty()) c.image_root = a.images;
    if (!a.system_prompt.empty()) ep.system_prompt = a.system_prompt;
    if (!a.decision.empty()) ep.decision = parse_decision(a.decision);
    if (a.decision_seed) ep.decision_seed = *a.decision_seed;
    if (a.max_in_flight) ep.max_in_flight = *a.max_in_flight;
    if (a.top_k) ep.logprob_top_k = *a.top_k;
    if (a.retries) ep.retries = *a.retries;
    if (a.timeout_ms) ep.timeout = std::chrono::milliseconds(*a.timeout_ms);
    if (const char* key = std::getenv(std::string(kApiKeyEnv).c_str()); key && *key) ep.api_key = key;
    require_path(a.dataset, "--dataset");
    ep.validate();
    ensure_dir(c.out);

    const auto dataset = read_dataset_file(a.dataset);
    const fs::path out(c.out);
    EvalOptions opt;
    opt.mode = c.mode;
    opt.image_root = c.image_root;
    opt.checkpoint_path = a.checkpoint.empty() ? (out / "checkpoint.ndjson").string() : a.checkpoint;
    opt.cancel = &g_interrupted;
    std::size_t last_report = 0;
    if (!a.quiet)
        opt.progress = [&](std::size_t done, std::size_t total) {
            if (done == total || done >= last_report + 500) {
                last_report = done;
                std::cerr << "scored " << done << "/" << total << '\n';
            }
        };
    install_signal_handlers();
    auto transport = make_http_transport(ep);
    EvalRun run;
    try {
        run = run_eval(dataset, ep, *transport, opt);
    } catch (const EndpointError&) {
        log("checkpoint kept at " + opt.checkpoint_path + "; rerun the same command to resume");
        throw;
    }
    write_eval_run((out / "run.json").string(), run);
    const auto report = write_metrics(out, run, dataset);
    fs::remove(opt.checkpoint_path);
    log("overall " + fmt_metric(report.overall) + ", conditional " + fmt_metric(report.conditional) + ", HC " +
        fmt_metric(report.hierarchical_consistency));
}

// ---- metrics -------------------------------------------------------------

struct MetricsArgs {
    std::string dataset, run, out;
};

void cmd_metrics(MetricsArgs& a) {
    require_path(a.dataset, "--dataset");
    require_path(a.run, "--run");
    if (a.out.empty()) a.out = fs::path(a.run).parent_path().string();
    if (a.out.empty()) a.out = ".";
    ensure_dir(a.out);
    const auto report = write_metrics(a.out, read_eval_run(a.run), read_dataset_file(a.dataset));
    std::cout << to_json(report).dump(2) << '\n';
}

// ---- analyze -------------------------------------------------------------

struct AnalyzeArgs {
    Common common;
    std::string dumps, run, dataset, taxonomy, out, reports = "rsa,delta,odds,separability,visual", vlm, lm;
    std::optional<std::uint64_t> seed;
    std::size_t subsets = 100, subset_size = 100;
    bool ridge = false, include_leaf_images = false;
    double svm_c = 1.0;
};

std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    for (std::string item; std::getline(ss, item, ',');)
        if (!item.empty()) out.push_back(item);
    return out;
}

class DumpCatalog {
public:
    explicit DumpCatalog(const std::string& dir) {
        if (!fs::is_directory(dir)) throw ConfigError("dump directory '" + dir + "' does not exist");
        std::vector<fs::path> manifests;
        for (const auto& e : fs::directory_iterator(dir)) {
            const auto name = e.path().filename().string();
            if (name.size() > 14 && name.ends_with(".manifest.json")) manifests.push_back(e.path());
        }
        std::sort(manifests.begin(), manifests.end());
        for (const auto& m : manifests) {
            dumps_.push_back(read_dump(m.string()));
            digests_[m.filename().string()] = dumps_.back().manifest.sha256;
        }
    }

    std::vector<const EmbeddingDump*> of(DumpRole role, const std::string& model = {}) const {
        std::vector<const EmbeddingDump*> out;
        for (const auto& d : dumps_)
            if (d.manifest.role == role && (model.empty() || d.manifest.model_id == model)) out.push_back(&d);
        return out;
    }

    // The single model with dumps of `role`, or `preferred`.
    const EmbeddingDump& one(DumpRole role, const std::string& preferred) const {
        auto found = of(role, preferred);
        if (found.empty())
            throw DataError("no " + std::string(to_string(role)) + " dump" +
                            (preferred.empty() ? "" : " for model '" + preferred + "'"));
        if (found.size() > 1)
            throw ConfigError("several " + std::string(to_string(role)) + " dumps; pick one with --vlm");
        return *found.front();
    }

    const std::map<std::string, std::string>& digests() const { return digests_; }

private:
    std::vector<EmbeddingDump> dumps_;
    std::map<std::string, std::string> digests_;
};

void cmd_analyze(AnalyzeArgs& a) {
    a.common.load();
    auto& c = a.common.cfg;
    if (!a.dumps.empty()) c.dumps = a.dumps;
    if (!a.taxonomy.empty()) c.taxonomy = a.taxonomy;
    if (!a.out.empty()) c.out = a.out;
    if (a.seed) c.seeds.analysis = *a.seed;
    require_path(c.dumps, "--dumps");
    const auto reports = split_list(a.reports);
    static const std::set<std::string> known = {"rsa", "delta", "odds", "separability", "visual"};
    for (const auto& r : reports)
        if (!known.contains(r)) throw ConfigError("unknown report '" + r + "' (rsa, delta, odds, separability, visual)");
    auto wants = [&](const char* r) { return std::find(reports.begin(), reports.end(), r) != reports.end(); };
    const bool need_taxonomy = wants("rsa") || wants("delta") || wants("visual");
    const bool need_run = wants("odds") || wants("visual");
    if (need_taxonomy) require_path(c.taxonomy, "--taxonomy");
    if (need_run) {
        require_path(a.run, "--run");
        require_path(a.dataset, "--dataset");
    }
    ensure_dir(c.out);
    const fs::path out(c.out);

    const DumpCatalog dumps(c.dumps);
    std::optional<Taxonomy> taxonomy;
    if (need_taxonomy) taxonomy = Taxonomy::load_file(c.taxonomy);
    std::optional<InstanceSet> results;
    std::optional<MetricsReport> metrics;
    std::string run_id;
    if (need_run) {
        const auto run = read_eval_run(a.run);
        run_id = run.run_id;
        const auto dataset = read_dataset_file(a.dataset);
        results = InstanceSet::build(instance_results(run, dataset));
        metrics = compute_metrics(*results);
    }
    auto provenance = [&] {
        ordered_json p;
        p["seed"] = c.seeds.analysis;
        p["dumps"] = dumps.digests();
        if (!run_id.empty()) p["run_id"] = run_id;
        return p;
    };

    if (wants("rsa")) {
        auto un = dumps.of(DumpRole::kUnembedding);
        const EmbeddingDump *vlm = nullptr, *lm = nullptr;
        if (!a.vlm.empty() && !a.lm.empty()) {
            vlm = &dumps.one(DumpRole::kUnembedding, a.vlm);
            lm = &dumps.one(DumpRole::kUnembedding, a.lm);
        } else if (un.size() == 2) {
            vlm = un[0];
            lm = un[1];
        } else {
            throw ConfigError("rsa needs two unembedding dumps; name them with --vlm and --lm");
        }
        HierarchyRsaOptions opt;
        opt.subsets = a.subsets;
        opt.subset_size = a.subset_size;
        opt.seed = c.seeds.analysis;
        opt.ridge = a.ridge;
        const auto r = hierarchy_rsa_report(*vlm, *lm, *taxonomy, opt);
        auto j = to_json(r);
        j["vlm"] = vlm->manifest.model_id;
        j["lm"] = lm->manifest.model_id;
        j["provenance"] = provenance();
        write_json(out / "rsa.json", j);
        write_text(out / "similarity_vlm.csv", matrix_csv(r.vlm_similarity));
        write_text(out / "similarity_lm.csv", matrix_csv(r.lm_similarity));
        write_text(out / "similarity_taxonomy.csv", matrix_csv(r.taxonomy_similarity));
        log("rsa: vlm-taxonomy " + fmt_metric(r.vlm_taxonomy.mean) + ", lm-taxonomy " + fmt_metric(r.lm_taxonomy.mean));
    }
    if (wants("delta")) {
        const auto& first = dumps.one(DumpRole::kStatic, a.vlm.empty() ? std::string() : a.vlm);
        // The text-only model joins the comparison when it has a static dump.
        const EmbeddingDump* second =
            a.lm.empty() || dumps.of(DumpRole::kStatic, a.lm).empty() ? nullptr : &dumps.one(DumpRole::kStatic, a.lm);
        if (a.vlm.empty() && a.lm.empty() && dumps.of(DumpRole::kStatic).size() > 1)
            throw ConfigError("several static dumps; name them with --vlm and --lm");
        const auto r = static_delta_report(first, second, *taxonomy, c.seeds.analysis);
        auto j = to_json(r);
        j["model_a"] = first.manifest.model_id;
        j["model_b"] = second ? ordered_json(second->manifest.model_id) : ordered_json(nullptr);
        j["provenance"] = provenance();
        write_json(out / "static_delta.json", j);
        write_text(out / "static_delta.csv", static_delta_csv(r));
        log("delta: mean " + fmt_metric(r.mean_a) + " over " + std::to_string(r.rows.size()) + " pairs");
    }
    if (wants("odds")) {
        const auto layers = dumps.of(DumpRole::kLayerwiseContextual, a.vlm);
        std::vector<EmbeddingDump> copies;
        for (const auto* d : layers) copies.push_back(*d);
        const auto r = layerwise_odds_report(copies, *results);
        auto j = to_json(r);
        j["provenance"] = provenance();
        write_json(out / "layer_odds.json", j);
        write_text(out / "layer_odds.csv", layer_odds_csv(r));
        log("odds: " + std::to_string(r.layers.size()) + " layers over " + std::to_string(r.n_instances) + " instances");
    }
    if (wants("separability")) {
        stats::SvmOptions svm;
        svm.c = a.svm_c;
        const auto r = separability_report(dumps.one(DumpRole::kQuestionFinal, a.vlm), svm);
        auto j = to_json(r);
        j["provenance"] = provenance();
        write_json(out / "separability.json", j);
        write_text(out / "pca_coordinates.csv", coordinates_csv(r));
        log("separability: svm error " + fmt_metric(r.svm.svm_error));
    }
    if (wants("visual")) {
        VisualOptions opt;
        opt.exclude_leaf_images = !a.include_leaf_images;
        const auto r = visual_similarity_report(dumps.one(DumpRole::kVisionPatch, a.vlm), leaf_membership(*taxonomy),
                                                conditional_accuracy_by_pair(*metrics), opt);
        auto j = to_json(r);
        j["exclude_leaf_images"] = opt.exclude_leaf_images;
        j["provenance"] = provenance();
        write_json(out / "visual.json", j);
        write_text(out / "visual_pairs.csv", visual_csv(r));
        log("visual: " + std::to_string(r.records.size()) + " pairs");
    }
}

// ---- validate-dump -------------------------------------------------------

int cmd_validate(const std::vector<std::string>& manifests) {
    bool all_ok = true;
    for (const auto& m : manifests) {
        const auto c = validate_dump(m);
        if (c.ok) {
            std::cout << "ok " << m << " sha256=" << c.sha256 << '\n';
        } else {
            all_ok = false;
            std::cout << "invalid " << m << '\n';
            for (const auto& p : c.problems) std::cout << "  " << p << '\n';
        }
    }
    return all_ok ? 0 : static_cast<int>(ExitCode::kData);
}

// ---- serve-mock ----------------------------------------------------------

struct MockArgs {
    std::string dataset, behavior = "gold", host = "127.0.0.1", fixed;
    int port = 8089;
    long max_delay_ms = 0;
    std::size_t fail_first = 0;
};

void cmd_serve_mock(MockArgs& a) {
    MockOptions opt;
    opt.behavior = parse_mock_behavior(a.behavior);
    opt.host = a.host;
    opt.port = a.port;
    opt.max_delay = std::chrono::milliseconds(a.max_delay_ms);
    opt.fail_first = a.fail_first;
    for (const auto& item : split_list(a.fixed)) {
        const auto eq = item.rfind('=');
        if (eq == std::string::npos) throw ConfigError("--fixed expects token=logprob pairs");
        try {
            opt.fixed_top_logprobs.emplace_back(item.substr(0, eq), std::stod(item.substr(eq + 1)));
        } catch (const std::exception&) {
            throw ConfigError("bad log-probability in '" + item + "'");
        }
    }
    if (opt.behavior == MockBehavior::kFixed && opt.fixed_top_logprobs.empty())
        throw ConfigError("behaviour 'fixed' needs --fixed");
    std::vector<QAInstance> dataset;
    if (!a.dataset.empty()) dataset = read_dataset_file(a.dataset);
    install_signal_handlers();
    MockChatServer server(dataset, opt);
    std::cout << server.base_url() << std::endl;
    while (!g_interrupted) std::this_thread::sleep_for(std::chrono::milliseconds(100));
    server.stop();
    log("served " + std::to_string(server.requests()) + " requests");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Hierarchical VQA dataset builder, evaluator and representation analyses."};
    app.require_subcommand(1);

    BuildArgs build;
    auto* b = app.add_subcommand("build", "Build the yes/no dataset from scene graphs.");
    b->add_option("--config", build.common.config_path, "Pipeline config (JSON).");
    b->add_option("--scenes", build.scenes, "Scene-graph file or directory.");
    b->add_option("--taxonomy", build.taxonomy, "Taxonomy file.");
    b->add_option("--seed", build.seed, "Sets every seed.");
    b->add_option("--dataset-seed", build.dataset_seed, "Rendering and balance seed.");
    b->add_option("--negatives-seed", build.negatives_seed, "Negative-sampling seed.");
    b->add_option("--out", build.out, "Output directory.");
    b->add_option("--quota", build.quota, "Per-scene quota of original positives.");
    b->add_option("--max-objects", build.max_objects, "Scene size limit.");
    b->add_option("--jobs", build.jobs, "Worker threads.")->check(CLI::PositiveNumber);

    TaxompsArgs tax;
    auto* t = app.add_subcommand("taxomps", "Generate taxonomic minimal-pair questions.");
    t->add_option("--config", tax.common.config_path);
    t->add_option("--taxonomy", tax.taxonomy);
    t->add_option("--seed", tax.seed);
    t->add_option("--out", tax.out);

    EvalArgs ev;
    auto* e = app.add_subcommand("eval", "Score a dataset against a chat-completions endpoint.");
    e->add_option("--config", ev.common.config_path);
    e->add_option("--dataset", ev.dataset, "Dataset JSONL.");
    e->add_option("--endpoint", ev.endpoint, "Base URL, e.g. http://127.0.0.1:8000/v1.");
    e->add_option("--model", ev.model);
    e->add_option("--mode", ev.mode, "text | question_only | vqa");
    e->add_option("--out", ev.out);
    e->add_option("--checkpoint", ev.checkpoint, "Defaults to <out>/checkpoint.ndjson.");
    e->add_option("--images", ev.images, "Image directory for vqa mode.");
    e->add_option("--system-prompt", ev.system_prompt);
    e->add_option("--decision", ev.decision, "argmax | sample");
    e->add_option("--decision-seed", ev.decision_seed);
    e->add_option("--max-in-flight", ev.max_in_flight);
    e->add_option("--top-k", ev.top_k, "top_logprobs requested (>= 10).");
    e->add_option("--retries", ev.retries);
    e->add_option("--timeout-ms", ev.timeout_ms);
    e->add_flag("--quiet", ev.quiet);

    MetricsArgs met;
    auto* m = app.add_subcommand("metrics", "Recompute metrics from a stored run.");
    m->add_option("--dataset", met.dataset);
    m->add_option("--run", met.run);
    m->add_option("--out", met.out);

    AnalyzeArgs an;
    auto* a = app.add_subcommand("analyze", "Representation analyses over embedding dumps.");
    a->add_option("--config", an.common.config_path);
    a->add_option("--dumps", an.dumps, "Directory of *.manifest.json dumps.");
    a->add_option("--run", an.run, "Evaluation run (odds, visual).");
    a->add_option("--dataset", an.dataset, "Dataset the run scored (odds, visual).");
    a->add_option("--taxonomy", an.taxonomy);
    a->add_option("--reports", an.reports, "Comma list of rsa,delta,odds,separability,visual.");
    a->add_option("--out", an.out);
    a->add_option("--seed", an.seed);
    a->add_option("--vlm", an.vlm, "Model id of the vision-language model dumps.");
    a->add_option("--lm", an.lm, "Model id of the text-only model dumps.");
    a->add_option("--subsets", an.subsets);
    a->add_option("--subset-size", an.subset_size);
    a->add_flag("--ridge", an.ridge, "Regularise near-singular covariances when whitening.");
    a->add_flag("--include-leaf-images", an.include_leaf_images, "Let the leaf's own images into its prototype.");
    a->add_option("--svm-c", an.svm_c);

    std::vector<std::string> manifests;
    auto* v = app.add_subcommand("validate-dump", "Check embedding dumps.");
    v->add_option("manifests", manifests, "Manifest files.")->required();

    MockArgs mock;
    auto* s = app.add_subcommand("serve-mock", "Serve a deterministic chat-completions mock.");
    s->add_option("--dataset", mock.dataset, "Dataset whose gold answers the mock knows.");
    s->add_option("--behavior", mock.behavior, "gold | always_yes | fixed | description_dependent | no_logprobs");
    s->add_option("--host", mock.host);
    s->add_option("--port", mock.port, "0 picks a free port.");
    s->add_option("--fixed", mock.fixed, "token=logprob list for 'fixed'.");
    s->add_option("--max-delay-ms", mock.max_delay_ms);
    s->add_option("--fail-first", mock.fail_first);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& err) {
        const int code = app.exit(err);
        return code == 0 ? 0 : static_cast<int>(ExitCode::kConfig);
    }

    try {
        if (*b) cmd_build(build);
        if (*t) cmd_taxomps(tax);
        if (*e) cmd_eval(ev);
        if (*m) cmd_metrics(met);
        if (*a) cmd_analyze(an);
        if (*v) return cmd_validate(manifests);
        if (*s) cmd_serve_mock(mock);
    } catch (const Error& err) {
        std::cerr << "error: " << err.what() << '\n';
        return static_cast<int>(err.category());
    } catch (const nlohmann::json::exception& err) {
        std::cerr << "error: " << err.what() << '\n';
        return static_cast<int>(ExitCode::kData);
    } catch (const fs::filesystem_error& err) {
        std::cerr << "error: " << err.what() << '\n';
        return static_cast<int>(ExitCode::kData);
    }
    return 0;
}
