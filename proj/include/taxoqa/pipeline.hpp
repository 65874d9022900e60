#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "json.hpp"

#include "taxoqa/evalclient.hpp"
#include "taxoqa/questgen.hpp"
#include "taxoqa/scene.hpp"
#include "taxoqa/taxonomy.hpp"

namespace taxoqa {

struct Seeds {
    // Rendering and balance sampling.
    std::uint64_t dataset = 0;
    // Negative sampling, substitution and minimal pairs.
    std::uint64_t negatives = 0;
    // RSA subsets and analysis draws.
    std::uint64_t analysis = 0;
};

struct PipelineConfig {
    std::string scenes;    // scene-graph file or directory of *.json files
    std::string taxonomy;  // taxonomy text file
    std::string out = "out";
    std::string dumps;
    std::string image_root;
    Seeds seeds;
    EndpointConfig endpoint;
    EvalMode mode = EvalMode::kText;
    std::size_t per_scene_quota = 40;
    std::size_t max_objects = 20;
    bool resample_per_depth = true;
    // Worker threads for the per-scene build; the output does not depend on it.
    std::size_t jobs = 1;

    // Missing keys keep their defaults; unknown keys are a ConfigError.
    static PipelineConfig from_json(const nlohmann::json& j);
    static PipelineConfig load(const std::string& path);
    nlohmann::ordered_json to_json() const;
};

// Scenes from one file or every *.json file of a directory, sorted by id.
std::vector<SceneGraph> load_scenes(const std::string& path);

struct BuildManifest {
    std::size_t n_scenes = 0;
    std::size_t n_scenes_accepted = 0;
    std::map<std::string, std::size_t> rejected_scenes;
    std::map<std::string, std::size_t> rejected_questions;
    // Questions dropped for lack of negative candidates.
    std::size_t no_negatives = 0;
    std::size_t n_candidates = 0;
    std::size_t n_positive = 0;
    std::size_t n_leaf = 0;
    std::size_t n_substituted = 0;
    std::size_t n_total = 0;
    std::map<std::size_t, std::size_t> by_depth;
    std::map<std::string, std::size_t> by_type;
    std::size_t n_chains = 0;
    std::size_t n_pairs = 0;
};

struct BuildOptions {
    Seeds seeds;
    std::size_t per_scene_quota = 40;
    std::size_t max_objects = 20;
    bool resample_per_depth = true;
    std::size_t jobs = 1;
};

struct BuildResult {
    std::vector<QAInstance> instances;
    BuildManifest manifest;
};

// parse/filter -> render -> instantiate -> negatives -> balance -> substitute.
// Balancing selects originals; every kept original brings its whole chain.
BuildResult build_dataset(const std::vector<SceneGraph>& scenes, const Taxonomy& taxonomy, const BuildOptions& options);

nlohmann::ordered_json to_json(const BuildManifest& m);

// Digest of the settings that determine build output: seeds, quotas, template
// version and the input file digests. Output paths are excluded.
std::string config_digest(const PipelineConfig& cfg);

}  // namespace taxoqa
