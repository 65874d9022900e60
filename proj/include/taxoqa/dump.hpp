#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "taxoqa/stats.hpp"

namespace taxoqa {

enum class DumpRole { kStatic, kLayerwiseContextual, kQuestionFinal, kVisionPatch, kUnembedding };

std::string_view to_string(DumpRole role);
DumpRole parse_dump_role(std::string_view name);

// Per-row metadata. Contextual rows carry the mention they were read from.
struct RowMeta {
    std::string instance_id;
    std::string concept_id;
    std::size_t mention_index = 0;
    // hyponym | hypernym | negative for contextual rows; hypernym | negative
    // class label for question rows.
    std::string kind;
    // positive, neg1..neg4
    std::string slot;
    std::string image_id;
    std::optional<std::size_t> char_start;
    std::optional<std::size_t> char_end;

    bool operator==(const RowMeta&) const = default;
};

struct DumpManifest {
    std::string model_id;
    DumpRole role = DumpRole::kStatic;
    std::optional<std::size_t> layer;
    std::size_t rows = 0;
    std::size_t dims = 0;
    std::vector<std::string> labels;
    std::vector<RowMeta> row_meta;
    // Payload file name relative to the manifest.
    std::string payload;
    std::string sha256;
    // Free-form record of inference settings (precision, chat template, ...).
    nlohmann::json inference = nlohmann::json::object();
};

struct EmbeddingDump {
    DumpManifest manifest;
    stats::Matrix payload;
};

inline constexpr std::string_view kDumpFormat = "taxoqa-dump-v1";

nlohmann::ordered_json to_json(const DumpManifest& m);
DumpManifest manifest_from_json(const nlohmann::json& j);

// Writes `<dir>/<name>.manifest.json` and `<dir>/<name>.f32` through temporary
// files and renames. Fills in rows, dims, payload and digest. Returns the
// manifest path.
std::string write_dump(const std::string& dir, const std::string& name, EmbeddingDump dump);

// Reads and validates a dump given the path of its manifest.
EmbeddingDump read_dump(const std::string& manifest_path);

struct DumpCheck {
    bool ok = true;
    std::vector<std::string> problems;
    std::string sha256;
};

// Schema, payload size, digest, finiteness and role-specific metadata checks.
DumpCheck validate_dump(const std::string& manifest_path);

}  // namespace taxoqa
