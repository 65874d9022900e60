#pragma once

#include <atomic>
#include <chrono>
#include <map>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

#include "taxoqa/questgen.hpp"

namespace taxoqa {

// Deterministic chat-completions endpoint for tests and offline runs.
enum class MockBehavior {
    // Answers every known prompt with its gold label.
    kGold,
    kAlwaysYes,
    // Returns `fixed_top_logprobs` for every request.
    kFixed,
    // Gold when the prompt carries a scene description, a hash-seeded coin otherwise.
    kDescriptionDependent,
    // Replies without log-probabilities.
    kNoLogprobs,
};

MockBehavior parse_mock_behavior(std::string_view name);

struct MockOptions {
    MockBehavior behavior = MockBehavior::kGold;
    std::vector<std::pair<std::string, double>> fixed_top_logprobs;
    // Each reply waits hash(prompt) mod max_delay, which shuffles completion order.
    std::chrono::milliseconds max_delay{0};
    // The first `fail_first` requests get HTTP 503.
    std::size_t fail_first = 0;
    std::string host = "127.0.0.1";
    // 0 picks a free port.
    int port = 0;
};

// Reply for one request body; throws DataError on a malformed request.
class MockResponder {
public:
    MockResponder(const std::vector<QAInstance>& dataset, MockOptions options);
    nlohmann::json respond(const nlohmann::json& request) const;
    const MockOptions& options() const noexcept { return options_; }

private:
    std::optional<Answer> gold_for(const std::string& text) const;

    MockOptions options_;
    // Prompt text -> gold; nullopt marks texts whose gold differs between questions.
    std::map<std::string, std::optional<Answer>> gold_;
};

// Serves MockResponder over HTTP on a background thread.
class MockChatServer {
public:
    MockChatServer(const std::vector<QAInstance>& dataset, MockOptions options);
    ~MockChatServer();
    MockChatServer(const MockChatServer&) = delete;
    MockChatServer& operator=(const MockChatServer&) = delete;

    int port() const noexcept { return port_; }
    // http://host:port/v1
    std::string base_url() const;
    std::size_t requests() const noexcept { return requests_.load(); }
    void stop();
    // Blocks until stop() is called from elsewhere.
    void wait();

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
    MockResponder responder_;
    int port_ = 0;
    std::atomic<std::size_t> requests_{0};
};

}  // namespace taxoqa
