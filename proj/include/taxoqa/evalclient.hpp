#pragma once

#include <atomic>
#include <chrono>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "taxoqa/metrics.hpp"
#include "taxoqa/questgen.hpp"

namespace taxoqa {

enum class EvalMode { kText, kQuestionOnly, kVqa };
std::string_view to_string(EvalMode m);
EvalMode parse_eval_mode(std::string_view name);

// argmax: deterministic, ties go to No. sample: one draw from the renormalised
// distribution, seeded per question.
enum class Decision { kArgmax, kSample };
std::string_view to_string(Decision d);
Decision parse_decision(std::string_view name);

inline constexpr std::string_view kApiKeyEnv = "TAXOQA_API_KEY";

struct EndpointConfig {
    // e.g. http://127.0.0.1:8080/v1; requests go to <base_url>/chat/completions.
    std::string base_url;
    std::string model_name;
    std::optional<std::string> api_key;
    std::size_t max_in_flight = 4;
    std::chrono::milliseconds timeout{60000};
    // Attempts after the first one, on transport failures only.
    std::size_t retries = 3;
    std::size_t logprob_top_k = 20;
    // Sent as a system message when set. The default is a bare user turn.
    std::optional<std::string> system_prompt;
    Decision decision = Decision::kArgmax;
    std::uint64_t decision_seed = 0;

    // Throws ConfigError.
    void validate() const;
};

// Image attachment: a data URL (data:image/png;base64,...).
struct Prompt {
    std::string text;
    std::optional<std::string> image_data_url;
};

// Slot 0 is the positive question, 1..4 the negatives.
inline constexpr std::size_t kSlotsPerInstance = 5;
std::string slot_name(std::size_t slot);

// text: "<description>\n\n<question>"; question_only: the question alone;
// vqa: the question plus the instance image read from `image_root`.
Prompt build_prompt(const QAInstance& inst, std::size_t slot, EvalMode mode, const std::string& image_root = {});

// Request body for a chat-completions endpoint.
nlohmann::json chat_request(const EndpointConfig& cfg, const Prompt& prompt);

struct YesNoScore {
    double p_yes = 0.5;
    double p_no = 0.5;
    Answer answer = Answer::kNo;
    // Surface form -> log-probability, for every Yes/No variant seen in the top-k.
    std::map<std::string, double> raw_variants;
    // Neither group appeared in the top-k. Scored incorrect.
    bool abstained = false;

    bool operator==(const YesNoScore&) const = default;
};

// The response carries no per-token log-probabilities.
class NoLogprobsError : public EndpointError {
public:
    using EndpointError::EndpointError;
};

// Connection failures, timeouts and 5xx/429 replies; retried.
class TransportError : public EndpointError {
public:
    using EndpointError::EndpointError;
};

const std::vector<std::string>& yes_variants();
const std::vector<std::string>& no_variants();

// Reads choices[0].logprobs.content[0].top_logprobs and aggregates each answer
// group by log-sum-exp, then renormalises across the two groups. `key` seeds the
// draw under Decision::kSample.
YesNoScore score_response(const nlohmann::json& response, Decision decision = Decision::kArgmax,
                          std::uint64_t seed = 0, std::string_view key = {});

// Posts one chat-completions request and returns the parsed reply.
class ChatTransport {
public:
    virtual ~ChatTransport() = default;
    // Must be safe to call from several threads at once.
    virtual nlohmann::json complete(const nlohmann::json& request) = 0;
};

std::unique_ptr<ChatTransport> make_http_transport(const EndpointConfig& cfg);

// score_yes_no with retries over a transport.
YesNoScore score_yes_no(ChatTransport& transport, const EndpointConfig& cfg, const Prompt& prompt,
                        std::string_view key = {}, std::size_t* attempts = nullptr);

struct ScoreRecord {
    std::string instance_id;
    std::size_t slot = 0;
    std::string question;
    Answer gold = Answer::kYes;
    YesNoScore score;
    std::size_t attempts = 1;

    bool correct() const { return !score.abstained && score.answer == gold; }
    bool operator==(const ScoreRecord&) const = default;
};

nlohmann::ordered_json to_json(const ScoreRecord& r);
ScoreRecord score_record_from_json(const nlohmann::json& j);

struct EvalRun {
    std::string run_id;
    EvalMode mode = EvalMode::kText;
    std::string model_name;
    std::string dataset_digest;
    Decision decision = Decision::kArgmax;
    std::size_t logprob_top_k = 0;
    // Sorted by instance id, then slot.
    std::vector<ScoreRecord> records;
};

struct EvalOptions {
    EvalMode mode = EvalMode::kText;
    std::string image_root;
    // Newline-delimited score records; appended as questions complete and read
    // back on the next run with the same path.
    std::string checkpoint_path;
    // Stops the run cleanly once set; the checkpoint keeps what finished.
    std::atomic<bool>* cancel = nullptr;
    std::function<void(std::size_t done, std::size_t total)> progress;
};

// Digest over the canonical dataset records.
std::string dataset_digest(const std::vector<QAInstance>& dataset);

class EvalCancelled : public EndpointError {
public:
    using EndpointError::EndpointError;
};

// Scores every question of every instance once. Requests run on up to
// cfg.max_in_flight threads; the result does not depend on completion order.
EvalRun run_eval(const std::vector<QAInstance>& dataset, const EndpointConfig& cfg, ChatTransport& transport,
                 const EvalOptions& options = {});

nlohmann::ordered_json to_json(const EvalRun& run);
EvalRun eval_run_from_json(const nlohmann::json& j);
void write_eval_run(const std::string& path, const EvalRun& run);
EvalRun read_eval_run(const std::string& path);

// Per-instance results for the metrics module. Throws DataError when the run
// and dataset disagree.
std::vector<InstanceResult> instance_results(const EvalRun& run, const std::vector<QAInstance>& dataset);

}  // namespace taxoqa
