#include "taxoqa/evalclient.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

#include "taxoqa/digest.hpp"
#include "taxoqa/fileio.hpp"
#include "taxoqa/random.hpp"

namespace taxoqa {

using nlohmann::json;
using nlohmann::ordered_json;
namespace fs = std::filesystem;

namespace {

constexpr std::string_view kCheckpointFormat = "taxoqa-checkpoint-v1";
constexpr std::string_view kRunFormat = "taxoqa-evalrun-v1";

double log_sum_exp(const std::vector<double>& xs) {
    const double m = *std::max_element(xs.begin(), xs.end());
    double s = 0;
    for (double x : xs) s += std::exp(x - m);
    return m + std::log(s);
}

std::string image_mime(const fs::path& p) {
    std::string ext = p.extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
    if (ext == ".png") return "image/png";
    if (ext == ".gif") return "image/gif";
    if (ext == ".webp") return "image/webp";
    return "image/jpeg";
}

std::size_t parse_slot(const std::string& s) {
    if (s == "positive") return 0;
    if (s.size() == 4 && s.starts_with("neg") && s[3] >= '1' && s[3] <= '4') return static_cast<std::size_t>(s[3] - '0');
    throw DataError("unknown slot '" + s + "'");
}

const Question& slot_question(const QAInstance& inst, std::size_t slot) {
    if (slot == 0) return inst.positive;
    if (slot > inst.negatives.size())
        throw DataError("instance '" + inst.instance_id + "' has no " + slot_name(slot) + " question");
    return inst.negatives[slot - 1];
}

std::string run_id_for(const EvalRun& run, const EndpointConfig& cfg) {
    std::ostringstream key;
    key << run.dataset_digest << '\n'
        << run.model_name << '\n'
        << to_string(run.mode) << '\n'
        << to_string(run.decision) << '\n'
        << cfg.decision_seed << '\n'
        << run.logprob_top_k << '\n'
        << cfg.system_prompt.value_or("");
    return sha256_hex(key.str()).substr(0, 16);
}

using Key = std::pair<std::string, std::size_t>;

struct Checkpoint {
    std::map<Key, ScoreRecord> done;
};

// Loads the finished records. A torn last line from a killed run is cut off
// so appends start on a clean line.
Checkpoint load_checkpoint(const std::string& path, const std::string& run_id) {
    Checkpoint c;
    if (!fs::exists(path)) return c;
    const std::string text = read_file(path);
    std::size_t pos = 0, good_end = 0, line_no = 0;
    bool header = false;
    while (pos < text.size()) {
        const std::size_t nl = text.find('\n', pos);
        if (nl == std::string::npos) break;
        const std::string line = text.substr(pos, nl - pos);
        ++line_no;
        json j;
        try {
            j = json::parse(line);
        } catch (const json::exception&) {
            // Only the final line may be damaged.
            if (text.find('\n', nl + 1) != std::string::npos)
                throw ParseError(path, line_no, "malformed checkpoint record");
            break;
        }
        if (!header) {
            if (j.value("format", std::string()) != kCheckpointFormat) throw ParseError(path, 1, "not a checkpoint file");
            if (j.value("run_id", std::string()) != run_id)
                throw ConfigError("checkpoint '" + path + "' belongs to run " + j.value("run_id", std::string()) +
                                  ", not " + run_id + "; remove it or change the path");
            header = true;
        } else {
            try {
                auto r = score_record_from_json(j);
                r.attempts = j.value("attempts", std::size_t{1});
                c.done[{r.instance_id, r.slot}] = std::move(r);
            } catch (const json::exception& e) {
                throw ParseError(path, line_no, e.what());
            }
        }
        pos = nl + 1;
        good_end = pos;
    }
    if (good_end != text.size()) fs::resize_file(path, good_end);
    if (!header) fs::remove(path);
    return c;
}

}  // namespace

std::string_view to_string(EvalMode m) {
    switch (m) {
        case EvalMode::kText: return "text";
        case EvalMode::kQuestionOnly: return "question_only";
        case EvalMode::kVqa: return "vqa";
    }
    return "text";
}

EvalMode parse_eval_mode(std::string_view name) {
    if (name == "text") return EvalMode::kText;
    if (name == "question_only") return EvalMode::kQuestionOnly;
    if (name == "vqa") return EvalMode::kVqa;
    throw ConfigError("unknown mode '" + std::string(name) + "' (text, question_only, vqa)");
}

std::string_view to_string(Decision d) { return d == Decision::kArgmax ? "argmax" : "sample"; }

Decision parse_decision(std::string_view name) {
    if (name == "argmax") return Decision::kArgmax;
    if (name == "sample") return Decision::kSample;
    throw ConfigError("unknown decision rule '" + std::string(name) + "' (argmax, sample)");
}

void EndpointConfig::validate() const {
    if (base_url.empty()) throw ConfigError("endpoint base_url is empty");
    if (!base_url.starts_with("http://") && !base_url.starts_with("https://"))
        throw ConfigError("endpoint base_url must start with http:// or https://");
    if (model_name.empty()) throw ConfigError("endpoint model name is empty");
    if (max_in_flight < 1) throw ConfigError("max_in_flight must be at least 1");
    if (timeout.count() <= 0) throw ConfigError("timeout must be positive");
    if (logprob_top_k < 10) throw ConfigError("logprob_top_k must be at least 10");
}

std::string slot_name(std::size_t slot) { return slot == 0 ? "positive" : "neg" + std::to_string(slot); }

Prompt build_prompt(const QAInstance& inst, std::size_t slot, EvalMode mode, const std::string& image_root) {
    const Question& q = slot_question(inst, slot);
    Prompt p;
    switch (mode) {
        case EvalMode::kText: p.text = inst.description + "\n\n" + q.text; break;
        case EvalMode::kQuestionOnly: p.text = q.text; break;
        case EvalMode::kVqa: {
            if (inst.image.empty())
                throw DataError("instance '" + inst.instance_id + "' has no image reference for vqa mode");
            const fs::path file = image_root.empty() ? fs::path(inst.image) : fs::path(image_root) / inst.image;
            if (!fs::is_regular_file(file))
                throw DataError("image '" + file.string() + "' for instance '" + inst.instance_id + "' not found");
            p.text = q.text;
            p.image_data_url = "data:" + image_mime(file) + ";base64," + base64_encode(read_file(file.string()));
            break;
        }
    }
    return p;
}

json chat_request(const EndpointConfig& cfg, const Prompt& prompt) {
    json messages = json::array();
    if (cfg.system_prompt) messages.push_back({{"role", "system"}, {"content", *cfg.system_prompt}});
    json user = {{"role", "user"}};
    if (prompt.image_data_url) {
        user["content"] = json::array({{{"type", "text"}, {"text", prompt.text}},
                                       {{"type", "image_url"}, {"image_url", {{"url", *prompt.image_data_url}}}}});
    } else {
        user["content"] = prompt.text;
    }
    messages.push_back(std::move(user));
    return {{"model", cfg.model_name},
            {"messages", std::move(messages)},
            {"max_tokens", 1},
            {"temperature", 0},
            {"logprobs", true},
            {"top_logprobs", cfg.logprob_top_k}};
}

const std::vector<std::string>& yes_variants() {
    static const std::vector<std::string> v = {"Yes", "yes", " Yes", " yes"};
    return v;
}

const std::vector<std::string>& no_variants() {
    static const std::vector<std::string> v = {"No", "no", " No", " no"};
    return v;
}

YesNoScore score_response(const json& response, Decision decision, std::uint64_t seed, std::string_view key) {
    const json* content = nullptr;
    try {
        const auto& lp = response.at("choices").at(0).at("logprobs");
        if (lp.is_object() && lp.contains("content") && lp.at("content").is_array() && !lp.at("content").empty())
            content = &lp.at("content").at(0);
    } catch (const json::exception&) {
    }
    if (!content) throw NoLogprobsError("response carries no token log-probabilities; the endpoint must support logprobs");

    YesNoScore s;
    auto consider = [&](const json& entry) {
        if (!entry.is_object() || !entry.contains("token") || !entry.contains("logprob")) return;
        const auto token = entry.at("token").get<std::string>();
        const bool known = std::find(yes_variants().begin(), yes_variants().end(), token) != yes_variants().end() ||
                           std::find(no_variants().begin(), no_variants().end(), token) != no_variants().end();
        if (known && entry.at("logprob").is_number()) s.raw_variants.emplace(token, entry.at("logprob").get<double>());
    };
    if (content->contains("top_logprobs") && content->at("top_logprobs").is_array())
        for (const auto& e : content->at("top_logprobs")) consider(e);
    consider(*content);

    std::vector<double> yes, no;
    for (const auto& [token, lp] : s.raw_variants) {
        if (std::find(yes_variants().begin(), yes_variants().end(), token) != yes_variants().end())
            yes.push_back(lp);
        else
            no.push_back(lp);
    }
    if (yes.empty() && no.empty()) {
        s.abstained = true;
        s.p_yes = s.p_no = 0.5;
        s.answer = Answer::kNo;
        return s;
    }
    if (no.empty()) {
        s.p_yes = 1;
        s.p_no = 0;
    } else if (yes.empty()) {
        s.p_yes = 0;
        s.p_no = 1;
    } else {
        const double ly = log_sum_exp(yes), ln = log_sum_exp(no);
        s.p_yes = 1 / (1 + std::exp(ln - ly));
        s.p_no = 1 - s.p_yes;
    }
    if (decision == Decision::kArgmax) {
        s.answer = s.p_yes > s.p_no ? Answer::kYes : Answer::kNo;
    } else {
        Rng rng(derive_seed(seed, key));
        s.answer = rng.uniform() < s.p_yes ? Answer::kYes : Answer::kNo;
    }
    return s;
}

YesNoScore score_yes_no(ChatTransport& transport, const EndpointConfig& cfg, const Prompt& prompt,
                        std::string_view key, std::size_t* attempts) {
    const json request = chat_request(cfg, prompt);
    for (std::size_t attempt = 0;; ++attempt) {
        try {
            const json reply = transport.complete(request);
            if (attempts) *attempts = attempt + 1;
            return score_response(reply, cfg.decision, cfg.decision_seed, key);
        } catch (const TransportError& e) {
            if (attempt >= cfg.retries)
                throw TransportError(std::string(e.what()) + " (after " + std::to_string(attempt + 1) + " attempts)");
            std::this_thread::sleep_for(std::chrono::milliseconds(std::min<std::size_t>(2000, 25u << attempt)));
        }
    }
}

ordered_json to_json(const ScoreRecord& r) {
    ordered_json j;
    j["instance_id"] = r.instance_id;
    j["slot"] = slot_name(r.slot);
    j["question"] = r.question;
    j["gold"] = to_string(r.gold);
    j["answer"] = to_string(r.score.answer);
    j["p_yes"] = r.score.p_yes;
    j["p_no"] = r.score.p_no;
    j["abstained"] = r.score.abstained;
    ordered_json v = ordered_json::object();
    for (const auto& [token, lp] : r.score.raw_variants) v[token] = lp;
    j["variants"] = std::move(v);
    j["correct"] = r.correct();
    return j;
}

ScoreRecord score_record_from_json(const json& j) {
    ScoreRecord r;
    r.instance_id = j.at("instance_id").get<std::string>();
    r.slot = parse_slot(j.at("slot").get<std::string>());
    r.question = j.at("question").get<std::string>();
    r.gold = parse_answer(j.at("gold").get<std::string>());
    r.score.answer = parse_answer(j.at("answer").get<std::string>());
    r.score.p_yes = j.at("p_yes").get<double>();
    r.score.p_no = j.at("p_no").get<double>();
    r.score.abstained = j.at("abstained").get<bool>();
    for (const auto& [token, lp] : j.at("variants").items()) r.score.raw_variants[token] = lp.get<double>();
    return r;
}

std::string dataset_digest(const std::vector<QAInstance>& dataset) {
    std::string canonical;
    for (const auto& inst : dataset) canonical += to_json(inst).dump() + "\n";
    return sha256_hex(canonical);
}

EvalRun run_eval(const std::vector<QAInstance>& dataset, const EndpointConfig& cfg, ChatTransport& transport,
                 const EvalOptions& options) {
    cfg.validate();
    if (dataset.empty()) throw DataError("dataset is empty");

    EvalRun run;
    run.mode = options.mode;
    run.model_name = cfg.model_name;
    run.dataset_digest = dataset_digest(dataset);
    run.decision = cfg.decision;
    run.logprob_top_k = cfg.logprob_top_k;
    run.run_id = run_id_for(run, cfg);

    // Work items in output order.
    std::vector<const QAInstance*> by_id;
    for (const auto& inst : dataset) by_id.push_back(&inst);
    std::sort(by_id.begin(), by_id.end(), [](auto* a, auto* b) { return a->instance_id < b->instance_id; });
    for (std::size_t i = 1; i < by_id.size(); ++i)
        if (by_id[i]->instance_id == by_id[i - 1]->instance_id)
            throw DataError("duplicate instance id '" + by_id[i]->instance_id + "'");
    struct Item {
        const QAInstance* inst;
        std::size_t slot;
    };
    std::vector<Item> items;
    for (const auto* inst : by_id) {
        if (inst->negatives.size() != kNegativesPerQuestion)
            throw DataError("instance '" + inst->instance_id + "' has " + std::to_string(inst->negatives.size()) +
                            " negatives");
        if (options.mode == EvalMode::kVqa && inst->image.empty())
            throw DataError("instance '" + inst->instance_id + "' has no image reference for vqa mode");
        for (std::size_t s = 0; s < kSlotsPerInstance; ++s) items.push_back({inst, s});
    }

    std::vector<std::optional<ScoreRecord>> results(items.size());
    std::ofstream checkpoint;
    if (!options.checkpoint_path.empty()) {
        auto done = load_checkpoint(options.checkpoint_path, run.run_id);
        for (std::size_t i = 0; i < items.size(); ++i) {
            auto it = done.done.find({items[i].inst->instance_id, items[i].slot});
            if (it == done.done.end()) continue;
            const Question& q = slot_question(*items[i].inst, items[i].slot);
            if (it->second.question != q.text || it->second.gold != q.gold)
                throw DataError("checkpoint record for " + items[i].inst->instance_id + "/" + slot_name(items[i].slot) +
                                " does not match the dataset");
            results[i] = std::move(it->second);
            done.done.erase(it);
        }
        if (!done.done.empty()) throw DataError("checkpoint names questions that are not in the dataset");
        const bool fresh = !fs::exists(options.checkpoint_path);
        checkpoint.open(options.checkpoint_path, std::ios::app | std::ios::binary);
        if (!checkpoint) throw DataError("cannot open checkpoint '" + options.checkpoint_path + "'");
        if (fresh) {
            ordered_json h;
            h["format"] = kCheckpointFormat;
            h["run_id"] = run.run_id;
            checkpoint << h.dump() << '\n' << std::flush;
        }
    }

    std::vector<std::size_t> pending;
    for (std::size_t i = 0; i < items.size(); ++i)
        if (!results[i]) pending.push_back(i);

    std::atomic<std::size_t> next{0};
    std::atomic<std::size_t> finished{items.size() - pending.size()};
    std::atomic<bool> stop{false};
    std::mutex mu;
    std::exception_ptr failure;
    auto worker = [&] {
        while (!stop.load()) {
            if (options.cancel && options.cancel->load()) break;
            const std::size_t k = next.fetch_add(1);
            if (k >= pending.size()) break;
            const Item& item = items[pending[k]];
            try {
                const Question& q = slot_question(*item.inst, item.slot);
                const Prompt prompt = build_prompt(*item.inst, item.slot, options.mode, options.image_root);
                ScoreRecord r;
                r.instance_id = item.inst->instance_id;
                r.slot = item.slot;
                r.question = q.text;
                r.gold = q.gold;
                r.score = score_yes_no(transport, cfg, prompt, r.instance_id + "/" + slot_name(r.slot), &r.attempts);
                std::lock_guard lock(mu);
                if (checkpoint.is_open()) {
                    auto line = to_json(r);
                    line["attempts"] = r.attempts;
                    checkpoint << line.dump() << '\n' << std::flush;
                }
                results[pending[k]] = std::move(r);
                const std::size_t n = ++finished;
                if (options.progress) options.progress(n, items.size());
            } catch (...) {
                std::lock_guard lock(mu);
                if (!failure) failure = std::current_exception();
                stop = true;
            }
        }
    };
    {
        const std::size_t threads = std::min(cfg.max_in_flight, std::max<std::size_t>(pending.size(), 1));
        std::vector<std::jthread> pool;
        for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
    }
    if (failure) std::rethrow_exception(failure);
    for (auto& r : results)
        if (!r) throw EvalCancelled("evaluation stopped with " + std::to_string(finished.load()) + " of " +
                                    std::to_string(items.size()) + " questions scored");
    for (auto& r : results) run.records.push_back(std::move(*r));
    return run;
}

ordered_json to_json(const EvalRun& run) {
    ordered_json j;
    j["format"] = kRunFormat;
    j["run_id"] = run.run_id;
    j["mode"] = to_string(run.mode);
    j["model"] = run.model_name;
    j["dataset_digest"] = run.dataset_digest;
    j["decision"] = to_string(run.decision);
    j["logprob_top_k"] = run.logprob_top_k;
    j["n_questions"] = run.records.size();
    std::size_t abstentions = 0;
    for (const auto& r : run.records) abstentions += r.score.abstained;
    j["n_abstained"] = abstentions;
    ordered_json recs = ordered_json::array();
    for (const auto& r : run.records) recs.push_back(to_json(r));
    j["records"] = std::move(recs);
    return j;
}

EvalRun eval_run_from_json(const json& j) {
    try {
        if (j.value("format", std::string()) != kRunFormat) throw DataError("not an evaluation run file");
        EvalRun run;
        run.run_id = j.at("run_id").get<std::string>();
        run.mode = parse_eval_mode(j.at("mode").get<std::string>());
        run.model_name = j.at("model").get<std::string>();
        run.dataset_digest = j.at("dataset_digest").get<std::string>();
        run.decision = parse_decision(j.at("decision").get<std::string>());
        run.logprob_top_k = j.at("logprob_top_k").get<std::size_t>();
        for (const auto& r : j.at("records")) run.records.push_back(score_record_from_json(r));
        return run;
    } catch (const json::exception& e) {
        throw DataError(std::string("malformed evaluation run: ") + e.what());
    }
}

void write_eval_run(const std::string& path, const EvalRun& run) {
    // One record per line keeps large runs diffable.
    const auto j = to_json(run);
    std::string out = "{\n";
    bool first = true;
    for (const auto& [k, v] : j.items()) {
        if (!first) out += ",\n";
        first = false;
        out += "  " + json(k).dump() + ": ";
        if (k == "records") {
            out += "[";
            for (std::size_t i = 0; i < v.size(); ++i) out += (i ? ",\n    " : "\n    ") + v[i].dump();
            out += v.empty() ? "]" : "\n  ]";
        } else {
            out += v.dump();
        }
    }
    out += "\n}\n";
    write_file_atomic(path, out);
}

EvalRun read_eval_run(const std::string& path) {
    try {
        return eval_run_from_json(json::parse(read_file(path)));
    } catch (const json::parse_error& e) {
        throw DataError("'" + path + "' is not valid JSON: " + e.what());
    }
}

std::vector<InstanceResult> instance_results(const EvalRun& run, const std::vector<QAInstance>& dataset) {
    std::map<Key, const ScoreRecord*> index;
    for (const auto& r : run.records) index[{r.instance_id, r.slot}] = &r;
    std::vector<InstanceResult> out;
    for (const auto& inst : dataset) {
        InstanceResult res;
        res.instance_id = inst.instance_id;
        res.substitution_depth = inst.substitution_depth;
        res.source_leaf = inst.source_leaf;
        res.target = inst.positive.target;
        res.positive_gold_yes = inst.positive.gold == Answer::kYes;
        res.parent_instance_id = inst.parent_instance_id;
        for (std::size_t s = 0; s < kSlotsPerInstance; ++s) {
            auto it = index.find({inst.instance_id, s});
            if (it == index.end())
                throw DataError("evaluation run has no score for " + inst.instance_id + "/" + slot_name(s));
            if (it->second->question != slot_question(inst, s).text)
                throw DataError("evaluation run question for " + inst.instance_id + "/" + slot_name(s) +
                                " differs from the dataset");
            const bool ok = it->second->correct();
            if (s == 0)
                res.positive_correct = ok;
            else
                res.negatives_correct[s - 1] = ok;
        }
        out.push_back(std::move(res));
    }
    return out;
}

}  // namespace taxoqa
