#include "taxoqa/dump.hpp"

#include <array>
#include <bit>
#include <cmath>
#include <cstring>
#include <filesystem>

#include "taxoqa/digest.hpp"
#include "taxoqa/fileio.hpp"

namespace taxoqa {

namespace fs = std::filesystem;
using nlohmann::json;
using nlohmann::ordered_json;

namespace {

constexpr std::array<std::pair<DumpRole, std::string_view>, 5> kRoles = {{
    {DumpRole::kStatic, "static"},
    {DumpRole::kLayerwiseContextual, "layerwise_contextual"},
    {DumpRole::kQuestionFinal, "question_final"},
    {DumpRole::kVisionPatch, "vision_patch"},
    {DumpRole::kUnembedding, "unembedding"},
}};

std::string read_file(const fs::path& p) { return taxoqa::read_file(p.string()); }

void write_atomic(const fs::path& p, std::string_view bytes) { write_file_atomic(p.string(), bytes); }

std::uint32_t to_little(std::uint32_t v) {
    if constexpr (std::endian::native == std::endian::big) return __builtin_bswap32(v);
    return v;
}

std::string encode_payload(const Eigen::MatrixXd& m) {
    std::string out(static_cast<std::size_t>(m.size()) * 4, '\0');
    std::size_t k = 0;
    for (Eigen::Index i = 0; i < m.rows(); ++i)
        for (Eigen::Index j = 0; j < m.cols(); ++j) {
            const auto bits = to_little(std::bit_cast<std::uint32_t>(static_cast<float>(m(i, j))));
            std::memcpy(out.data() + 4 * k++, &bits, 4);
        }
    return out;
}

Eigen::MatrixXd decode_payload(std::string_view bytes, std::size_t rows, std::size_t dims) {
    Eigen::MatrixXd m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(dims));
    std::size_t k = 0;
    for (std::size_t i = 0; i < rows; ++i)
        for (std::size_t j = 0; j < dims; ++j) {
            std::uint32_t bits;
            std::memcpy(&bits, bytes.data() + 4 * k++, 4);
            m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
                static_cast<double>(std::bit_cast<float>(to_little(bits)));
        }
    return m;
}

bool needs_row_meta(DumpRole r) {
    return r == DumpRole::kLayerwiseContextual || r == DumpRole::kQuestionFinal || r == DumpRole::kVisionPatch;
}

std::vector<std::string> structural_problems(const DumpManifest& m) {
    std::vector<std::string> p;
    if (m.labels.size() != m.rows)
        p.push_back("manifest lists " + std::to_string(m.labels.size()) + " labels for " + std::to_string(m.rows) +
                    " rows");
    if (m.dims == 0) p.push_back("dims is zero");
    if (m.role == DumpRole::kLayerwiseContextual && !m.layer) p.push_back("layerwise dump without a layer index");
    if (needs_row_meta(m.role)) {
        if (m.row_meta.size() != m.rows) {
            p.push_back("role '" + std::string(to_string(m.role)) + "' needs row metadata for every row");
        } else {
            for (std::size_t i = 0; i < m.row_meta.size(); ++i) {
                const auto& r = m.row_meta[i];
                const std::string at = "row " + std::to_string(i) + ": ";
                switch (m.role) {
                    case DumpRole::kLayerwiseContextual:
                        if (r.instance_id.empty() || r.concept_id.empty()) p.push_back(at + "missing instance_id or concept");
                        if (r.kind != "hyponym" && r.kind != "hypernym" && r.kind != "negative")
                            p.push_back(at + "kind must be hyponym, hypernym or negative");
                        break;
                    case DumpRole::kQuestionFinal:
                        if (r.instance_id.empty()) p.push_back(at + "missing instance_id");
                        if (r.kind != "hypernym" && r.kind != "negative")
                            p.push_back(at + "kind must be hypernym or negative");
                        break;
                    case DumpRole::kVisionPatch:
                        if (r.concept_id.empty() || r.image_id.empty()) p.push_back(at + "missing concept or image_id");
                        break;
                    default: break;
                }
                if (p.size() > 20) return p;
            }
        }
    }
    return p;
}

}  // namespace

std::string_view to_string(DumpRole role) {
    for (const auto& [r, name] : kRoles)
        if (r == role) return name;
    return "static";
}

DumpRole parse_dump_role(std::string_view name) {
    for (const auto& [r, n] : kRoles)
        if (n == name) return r;
    throw DataError("unknown dump role '" + std::string(name) + "'");
}

ordered_json to_json(const DumpManifest& m) {
    ordered_json j;
    j["format"] = kDumpFormat;
    j["model_id"] = m.model_id;
    j["role"] = to_string(m.role);
    j["layer"] = m.layer ? ordered_json(*m.layer) : ordered_json(nullptr);
    j["rows"] = m.rows;
    j["dims"] = m.dims;
    j["dtype"] = "float32-le";
    j["payload"] = m.payload;
    j["sha256"] = m.sha256;
    j["labels"] = m.labels;
    if (!m.row_meta.empty()) {
        ordered_json rows = ordered_json::array();
        for (const auto& r : m.row_meta) {
            ordered_json o;
            if (!r.instance_id.empty()) o["instance_id"] = r.instance_id;
            if (!r.concept_id.empty()) o["concept"] = r.concept_id;
            o["mention_index"] = r.mention_index;
            if (!r.kind.empty()) o["kind"] = r.kind;
            if (!r.slot.empty()) o["slot"] = r.slot;
            if (!r.image_id.empty()) o["image_id"] = r.image_id;
            if (r.char_start) o["char_start"] = *r.char_start;
            if (r.char_end) o["char_end"] = *r.char_end;
            rows.push_back(std::move(o));
        }
        j["row_meta"] = std::move(rows);
    }
    j["inference"] = m.inference;
    return j;
}

DumpManifest manifest_from_json(const json& j) {
    try {
        if (j.value("format", std::string()) != kDumpFormat)
            throw DataError("not a " + std::string(kDumpFormat) + " manifest");
        if (j.value("dtype", std::string("float32-le")) != "float32-le")
            throw DataError("unsupported dtype '" + j.at("dtype").get<std::string>() + "'");
        DumpManifest m;
        m.model_id = j.at("model_id").get<std::string>();
        m.role = parse_dump_role(j.at("role").get<std::string>());
        if (j.contains("layer") && !j.at("layer").is_null()) m.layer = j.at("layer").get<std::size_t>();
        m.rows = j.at("rows").get<std::size_t>();
        m.dims = j.at("dims").get<std::size_t>();
        m.payload = j.at("payload").get<std::string>();
        m.sha256 = j.at("sha256").get<std::string>();
        m.labels = j.at("labels").get<std::vector<std::string>>();
        if (j.contains("row_meta")) {
            for (const auto& o : j.at("row_meta")) {
                RowMeta r;
                r.instance_id = o.value("instance_id", std::string());
                r.concept_id = o.value("concept", std::string());
                r.mention_index = o.value("mention_index", std::size_t{0});
                r.kind = o.value("kind", std::string());
                r.slot = o.value("slot", std::string());
                r.image_id = o.value("image_id", std::string());
                if (o.contains("char_start")) r.char_start = o.at("char_start").get<std::size_t>();
                if (o.contains("char_end")) r.char_end = o.at("char_end").get<std::size_t>();
                m.row_meta.push_back(std::move(r));
            }
        }
        if (j.contains("inference")) m.inference = j.at("inference");
        return m;
    } catch (const json::exception& e) {
        throw DataError(std::string("malformed dump manifest: ") + e.what());
    }
}

std::string write_dump(const std::string& dir, const std::string& name, EmbeddingDump dump) {
    dump.payload.validate();
    auto& m = dump.manifest;
    m.rows = static_cast<std::size_t>(dump.payload.rows());
    m.dims = static_cast<std::size_t>(dump.payload.cols());
    if (m.labels.empty() && !dump.payload.row_labels.empty()) m.labels = dump.payload.row_labels;
    const auto problems = structural_problems(m);
    if (!problems.empty()) throw DataError("refusing to write dump '" + name + "': " + problems.front());

    fs::create_directories(dir);
    const std::string bytes = encode_payload(dump.payload.values);
    m.payload = name + ".f32";
    m.sha256 = sha256_hex(bytes);
    write_atomic(fs::path(dir) / m.payload, bytes);
    const fs::path manifest = fs::path(dir) / (name + ".manifest.json");
    write_atomic(manifest, to_json(m).dump(2) + "\n");
    return manifest.string();
}

DumpCheck validate_dump(const std::string& manifest_path) {
    DumpCheck c;
    auto fail = [&](std::string what) {
        c.ok = false;
        c.problems.push_back(std::move(what));
    };
    DumpManifest m;
    try {
        m = manifest_from_json(json::parse(read_file(manifest_path)));
    } catch (const json::exception& e) {
        fail(std::string("manifest is not valid JSON: ") + e.what());
        return c;
    } catch (const Error& e) {
        fail(e.what());
        return c;
    }
    for (auto& p : structural_problems(m)) fail(std::move(p));

    const fs::path payload = fs::path(manifest_path).parent_path() / m.payload;
    std::string bytes;
    try {
        bytes = read_file(payload);
    } catch (const Error& e) {
        fail(e.what());
        return c;
    }
    c.sha256 = sha256_hex(bytes);
    if (c.sha256 != m.sha256) fail("digest mismatch: manifest " + m.sha256 + ", payload " + c.sha256);
    const std::size_t expected = m.rows * m.dims * 4;
    if (bytes.size() != expected) {
        fail("payload has " + std::to_string(bytes.size()) + " bytes, expected " + std::to_string(expected));
        return c;
    }
    const auto values = decode_payload(bytes, m.rows, m.dims);
    if (!values.allFinite()) fail("payload contains non-finite values");
    return c;
}

EmbeddingDump read_dump(const std::string& manifest_path) {
    const auto check = validate_dump(manifest_path);
    if (!check.ok) throw DataError("invalid dump '" + manifest_path + "': " + check.problems.front());
    EmbeddingDump d;
    d.manifest = manifest_from_json(json::parse(read_file(manifest_path)));
    const auto bytes = read_file(fs::path(manifest_path).parent_path() / d.manifest.payload);
    d.payload = stats::Matrix(decode_payload(bytes, d.manifest.rows, d.manifest.dims), d.manifest.labels);
    return d;
}

}  // namespace taxoqa
