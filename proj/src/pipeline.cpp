#include "taxoqa/pipeline.hpp"

#include <filesystem>
#include <set>
#include <thread>
#include <atomic>
#include <mutex>

#include "taxoqa/digest.hpp"
#include "taxoqa/fileio.hpp"
#include "taxoqa/random.hpp"

namespace taxoqa {

using nlohmann::json;
using nlohmann::ordered_json;
namespace fs = std::filesystem;

namespace {

void reject_unknown(const json& j, std::initializer_list<std::string_view> keys, const std::string& where) {
    for (const auto& [k, v] : j.items())
        if (std::find(keys.begin(), keys.end(), k) == keys.end())
            throw ConfigError("unknown config key '" + where + k + "'");
}

std::uint64_t seed_value(const json& v, const std::string& name) {
    if (v.is_number_unsigned()) return v.get<std::uint64_t>();
    if (v.is_number_integer() && v.get<std::int64_t>() >= 0) return static_cast<std::uint64_t>(v.get<std::int64_t>());
    throw ConfigError("seed '" + name + "' must be a non-negative 64-bit integer");
}

struct SceneOutput {
    std::vector<QAInstance> instances;
    BuildManifest counts;
};

SceneOutput build_scene(const SceneGraph& scene, const Taxonomy& taxonomy, const BuildOptions& opt) {
    SceneOutput out;
    auto& c = out.counts;
    const auto verdict = filter_scene(scene, opt.max_objects);
    if (!verdict.accepted) {
        ++c.rejected_scenes[std::string(to_string(verdict.reason))];
        return out;
    }
    ++c.n_scenes_accepted;
    const std::string description = render_description(scene, derive_seed(opt.seeds.dataset, "render:" + scene.scene_id));
    const auto scene_concepts = scene.concept_names();

    std::vector<QAInstance> originals;
    for (const auto& object : scene.objects) {
        // Substitution needs a stored chain.
        if (!taxonomy.is_leaf(object.name)) continue;
        for (auto& q : synthesize_questions(object)) {
            ++c.n_candidates;
            const auto v = filter_question(scene, taxonomy, {{object.object_id}, std::string(to_string(q.gold))});
            if (!v.accepted) {
                ++c.rejected_questions[std::string(to_string(v.reason))];
                continue;
            }
            QAInstance inst;
            inst.instance_id = scene.scene_id + ":" + object.object_id + ":" + std::string(to_string(q.qtype));
            auto negs = sample_negatives(q, scene_concepts, taxonomy, derive_seed(opt.seeds.negatives, inst.instance_id));
            if (!negs) {
                ++c.no_negatives;
                continue;
            }
            inst.scene_id = scene.scene_id;
            inst.description = description;
            inst.positive = std::move(q);
            inst.negatives = std::move(*negs);
            inst.source_leaf = object.name;
            inst.image = scene.image;
            originals.push_back(std::move(inst));
        }
    }
    const auto kept = balance_sample({{scene.scene_id, std::move(originals)}}, opt.per_scene_quota, opt.seeds.dataset);
    const SubstitutionOptions sub{opt.resample_per_depth};
    for (const auto& inst : kept) {
        out.instances.push_back(inst);
        for (auto& s : substitute_hypernyms(inst, scene, taxonomy, opt.seeds.negatives, sub))
            out.instances.push_back(std::move(s));
    }
    return out;
}

}  // namespace

PipelineConfig PipelineConfig::from_json(const json& j) {
    try {
        reject_unknown(j, {"paths", "seeds", "endpoint", "mode", "per_scene_quota", "max_objects",
                           "resample_per_depth", "jobs"},
                       "");
        PipelineConfig c;
        if (auto p = j.find("paths"); p != j.end()) {
            reject_unknown(*p, {"scenes", "taxonomy", "out", "dumps", "images"}, "paths.");
            c.scenes = p->value("scenes", c.scenes);
            c.taxonomy = p->value("taxonomy", c.taxonomy);
            c.out = p->value("out", c.out);
            c.dumps = p->value("dumps", c.dumps);
            c.image_root = p->value("images", c.image_root);
        }
        if (auto s = j.find("seeds"); s != j.end()) {
            reject_unknown(*s, {"dataset", "negatives", "analysis"}, "seeds.");
            if (s->contains("dataset")) c.seeds.dataset = seed_value(s->at("dataset"), "dataset");
            if (s->contains("negatives")) c.seeds.negatives = seed_value(s->at("negatives"), "negatives");
            if (s->contains("analysis")) c.seeds.analysis = seed_value(s->at("analysis"), "analysis");
        }
        if (auto e = j.find("endpoint"); e != j.end()) {
            reject_unknown(*e, {"base_url", "model", "max_in_flight", "timeout_ms", "retries", "logprob_top_k",
                                "system_prompt", "decision", "decision_seed"},
                           "endpoint.");
            auto& ep = c.endpoint;
            ep.base_url = e->value("base_url", ep.base_url);
            ep.model_name = e->value("model", ep.model_name);
            ep.max_in_flight = e->value("max_in_flight", ep.max_in_flight);
            ep.timeout = std::chrono::milliseconds(e->value("timeout_ms", ep.timeout.count()));
            ep.retries = e->value("retries", ep.retries);
            ep.logprob_top_k = e->value("logprob_top_k", ep.logprob_top_k);
            if (e->contains("system_prompt") && !e->at("system_prompt").is_null())
                ep.system_prompt = e->at("system_prompt").get<std::string>();
            if (e->contains("decision")) ep.decision = parse_decision(e->at("decision").get<std::string>());
            if (e->contains("decision_seed")) ep.decision_seed = seed_value(e->at("decision_seed"), "decision_seed");
        }
        if (j.contains("mode")) c.mode = parse_eval_mode(j.at("mode").get<std::string>());
        c.per_scene_quota = j.value("per_scene_quota", c.per_scene_quota);
        c.max_objects = j.value("max_objects", c.max_objects);
        c.resample_per_depth = j.value("resample_per_depth", c.resample_per_depth);
        c.jobs = j.value("jobs", c.jobs);
        return c;
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config: ") + e.what());
    }
}

PipelineConfig PipelineConfig::load(const std::string& path) {
    std::string text;
    try {
        text = read_file(path);
    } catch (const DataError&) {
        throw ConfigError("cannot read config '" + path + "'");
    }
    try {
        return from_json(json::parse(text));
    } catch (const json::parse_error& e) {
        throw ConfigError("config '" + path + "' is not valid JSON: " + e.what());
    }
}

ordered_json PipelineConfig::to_json() const {
    ordered_json j;
    j["paths"] = {{"scenes", scenes}, {"taxonomy", taxonomy}, {"out", out}, {"dumps", dumps}, {"images", image_root}};
    j["seeds"] = {{"dataset", seeds.dataset}, {"negatives", seeds.negatives}, {"analysis", seeds.analysis}};
    ordered_json e;
    e["base_url"] = endpoint.base_url;
    e["model"] = endpoint.model_name;
    e["max_in_flight"] = endpoint.max_in_flight;
    e["timeout_ms"] = endpoint.timeout.count();
    e["retries"] = endpoint.retries;
    e["logprob_top_k"] = endpoint.logprob_top_k;
    e["system_prompt"] = endpoint.system_prompt ? ordered_json(*endpoint.system_prompt) : ordered_json(nullptr);
    e["decision"] = to_string(endpoint.decision);
    e["decision_seed"] = endpoint.decision_seed;
    j["endpoint"] = std::move(e);
    j["mode"] = taxoqa::to_string(mode);
    j["per_scene_quota"] = per_scene_quota;
    j["max_objects"] = max_objects;
    j["resample_per_depth"] = resample_per_depth;
    j["jobs"] = jobs;
    return j;
}

std::vector<SceneGraph> load_scenes(const std::string& path) {
    std::vector<std::string> files;
    if (fs::is_directory(path)) {
        for (const auto& e : fs::directory_iterator(path))
            if (e.is_regular_file() && e.path().extension() == ".json") files.push_back(e.path().string());
        std::sort(files.begin(), files.end());
        if (files.empty()) throw DataError("no scene files (*.json) in '" + path + "'");
    } else if (fs::is_regular_file(path)) {
        files.push_back(path);
    } else {
        throw DataError("scene path '" + path + "' does not exist");
    }
    std::vector<SceneGraph> scenes;
    for (const auto& f : files) {
        auto part = parse_scene_graph_file(f);
        scenes.insert(scenes.end(), std::make_move_iterator(part.begin()), std::make_move_iterator(part.end()));
    }
    std::sort(scenes.begin(), scenes.end(), [](const auto& a, const auto& b) { return a.scene_id < b.scene_id; });
    for (std::size_t i = 1; i < scenes.size(); ++i)
        if (scenes[i].scene_id == scenes[i - 1].scene_id)
            throw DataError("scene '" + scenes[i].scene_id + "' appears in more than one file");
    return scenes;
}

BuildResult build_dataset(const std::vector<SceneGraph>& scenes, const Taxonomy& taxonomy, const BuildOptions& options) {
    if (options.jobs < 1) throw ConfigError("jobs must be at least 1");
    std::vector<SceneOutput> per_scene(scenes.size());
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex mu;
    auto worker = [&] {
        for (std::size_t i; (i = next.fetch_add(1)) < scenes.size();) {
            try {
                per_scene[i] = build_scene(scenes[i], taxonomy, options);
            } catch (...) {
                std::lock_guard lock(mu);
                if (!failure) failure = std::current_exception();
            }
        }
    };
    {
        std::vector<std::jthread> pool;
        for (std::size_t t = 0; t < std::min(options.jobs, std::max<std::size_t>(scenes.size(), 1)); ++t)
            pool.emplace_back(worker);
    }
    if (failure) std::rethrow_exception(failure);

    BuildResult r;
    auto& m = r.manifest;
    m.n_scenes = scenes.size();
    for (auto& s : per_scene) {
        const auto& c = s.counts;
        m.n_scenes_accepted += c.n_scenes_accepted;
        for (const auto& [k, v] : c.rejected_scenes) m.rejected_scenes[k] += v;
        for (const auto& [k, v] : c.rejected_questions) m.rejected_questions[k] += v;
        m.no_negatives += c.no_negatives;
        m.n_candidates += c.n_candidates;
        r.instances.insert(r.instances.end(), std::make_move_iterator(s.instances.begin()),
                           std::make_move_iterator(s.instances.end()));
    }
    std::set<std::vector<ConceptId>> chains;
    std::set<std::pair<ConceptId, ConceptId>> pairs;
    for (const auto& inst : r.instances) {
        ++m.by_depth[inst.substitution_depth];
        ++m.by_type[std::string(to_string(inst.positive.qtype))];
        if (inst.substitution_depth == 0) {
            ++m.n_leaf;
            chains.insert(taxonomy.hypernym_chain(inst.source_leaf));
        } else {
            ++m.n_substituted;
            pairs.emplace(inst.source_leaf, inst.positive.target);
        }
    }
    m.n_positive = r.instances.size();
    m.n_total = kSlotsPerInstance * m.n_positive;
    m.n_chains = chains.size();
    m.n_pairs = pairs.size();
    return r;
}

ordered_json to_json(const BuildManifest& m) {
    ordered_json j;
    j["n_scenes"] = m.n_scenes;
    j["n_scenes_accepted"] = m.n_scenes_accepted;
    j["rejected_scenes"] = m.rejected_scenes;
    j["n_candidate_questions"] = m.n_candidates;
    j["rejected_questions"] = m.rejected_questions;
    j["dropped_no_negatives"] = m.no_negatives;
    j["n_positive"] = m.n_positive;
    j["n_positive_leaf"] = m.n_leaf;
    j["n_positive_substituted"] = m.n_substituted;
    j["n_total"] = m.n_total;
    ordered_json depth = ordered_json::object();
    for (const auto& [d, n] : m.by_depth) depth[std::to_string(d)] = n;
    j["by_depth"] = std::move(depth);
    j["by_type"] = m.by_type;
    j["n_chains"] = m.n_chains;
    j["n_pairs"] = m.n_pairs;
    return j;
}

std::string config_digest(const PipelineConfig& cfg) {
    ordered_json j;
    j["seeds"] = {{"dataset", cfg.seeds.dataset}, {"negatives", cfg.seeds.negatives}, {"analysis", cfg.seeds.analysis}};
    j["per_scene_quota"] = cfg.per_scene_quota;
    j["max_objects"] = cfg.max_objects;
    j["resample_per_depth"] = cfg.resample_per_depth;
    j["template_version"] = kTemplateVersion;
    j["taxonomy_sha256"] = cfg.taxonomy.empty() ? "" : sha256_file(cfg.taxonomy);
    std::string scenes;
    if (!cfg.scenes.empty()) {
        if (fs::is_directory(cfg.scenes)) {
            std::vector<fs::path> files;
            for (const auto& e : fs::directory_iterator(cfg.scenes))
                if (e.is_regular_file() && e.path().extension() == ".json") files.push_back(e.path());
            std::sort(files.begin(), files.end());
            for (const auto& f : files) scenes += f.filename().string() + " " + sha256_file(f.string()) + "\n";
        } else {
            scenes = sha256_file(cfg.scenes);
        }
    }
    j["scenes_sha256"] = sha256_hex(scenes);
    return sha256_hex(j.dump()).substr(0, 16);
}

}  // namespace taxoqa
