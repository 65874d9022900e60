// Everything that touches httplib lives here.
#include "httplib.h"

#include <cmath>
#include <thread>

#include "taxoqa/evalclient.hpp"
#include "taxoqa/mockserver.hpp"
#include "taxoqa/random.hpp"

namespace taxoqa {

using nlohmann::json;

namespace {

struct Url {
    std::string origin;
    std::string path;
};

Url split_url(const std::string& url) {
    const auto scheme = url.find("://");
    const auto slash = url.find('/', scheme == std::string::npos ? 0 : scheme + 3);
    Url u;
    u.origin = url.substr(0, slash);
    u.path = slash == std::string::npos ? "" : url.substr(slash);
    while (!u.path.empty() && u.path.back() == '/') u.path.pop_back();
    return u;
}

class HttpTransport : public ChatTransport {
public:
    explicit HttpTransport(const EndpointConfig& cfg) : cfg_(cfg), url_(split_url(cfg.base_url)) {}

    json complete(const json& request) override {
        // One client per call: httplib clients are not meant for concurrent use.
        httplib::Client client(url_.origin);
        const auto secs = std::chrono::duration_cast<std::chrono::seconds>(cfg_.timeout);
        const auto usecs = std::chrono::duration_cast<std::chrono::microseconds>(cfg_.timeout - secs);
        client.set_connection_timeout(secs.count(), usecs.count());
        client.set_read_timeout(secs.count(), usecs.count());
        client.set_write_timeout(secs.count(), usecs.count());
        if (cfg_.api_key) client.set_bearer_token_auth(*cfg_.api_key);
        auto res = client.Post(url_.path + "/chat/completions", request.dump(), "application/json");
        if (!res) throw TransportError("request to " + cfg_.base_url + " failed: " + httplib::to_string(res.error()));
        if (res->status == 429 || res->status >= 500)
            throw TransportError("endpoint returned HTTP " + std::to_string(res->status));
        if (res->status != 200)
            throw EndpointError("endpoint returned HTTP " + std::to_string(res->status) + ": " + res->body.substr(0, 300));
        try {
            return json::parse(res->body);
        } catch (const json::exception&) {
            throw EndpointError("endpoint reply is not JSON");
        }
    }

private:
    EndpointConfig cfg_;
    Url url_;
};

std::string user_text(const json& request) {
    const auto& messages = request.at("messages");
    for (auto it = messages.rbegin(); it != messages.rend(); ++it) {
        if (it->at("role") != "user") continue;
        const auto& c = it->at("content");
        if (c.is_string()) return c.get<std::string>();
        std::string text;
        for (const auto& part : c)
            if (part.at("type") == "text") text += part.at("text").get<std::string>();
        return text;
    }
    throw DataError("request has no user message");
}

json completion(const std::string& model, const std::vector<std::pair<std::string, double>>& top) {
    json tops = json::array();
    for (const auto& [token, lp] : top) tops.push_back({{"token", token}, {"logprob", lp}, {"bytes", nullptr}});
    const std::string chosen = top.empty() ? "" : top.front().first;
    const double chosen_lp = top.empty() ? 0.0 : top.front().second;
    json choice = {{"index", 0},
                   {"message", {{"role", "assistant"}, {"content", chosen}}},
                   {"logprobs", {{"content", json::array({{{"token", chosen}, {"logprob", chosen_lp}, {"top_logprobs", tops}}})}}},
                   {"finish_reason", "length"}};
    return {{"object", "chat.completion"}, {"model", model}, {"choices", json::array({choice})}};
}

std::vector<std::pair<std::string, double>> confident(Answer a) {
    const double hi = std::log(0.9), lo = std::log(0.1);
    if (a == Answer::kYes) return {{" Yes", hi}, {" No", lo}};
    return {{" No", hi}, {" Yes", lo}};
}

}  // namespace

std::unique_ptr<ChatTransport> make_http_transport(const EndpointConfig& cfg) {
    cfg.validate();
    return std::make_unique<HttpTransport>(cfg);
}

MockBehavior parse_mock_behavior(std::string_view name) {
    if (name == "gold") return MockBehavior::kGold;
    if (name == "always_yes") return MockBehavior::kAlwaysYes;
    if (name == "fixed") return MockBehavior::kFixed;
    if (name == "description_dependent") return MockBehavior::kDescriptionDependent;
    if (name == "no_logprobs") return MockBehavior::kNoLogprobs;
    throw ConfigError("unknown mock behaviour '" + std::string(name) + "'");
}

MockResponder::MockResponder(const std::vector<QAInstance>& dataset, MockOptions options)
    : options_(std::move(options)) {
    auto add = [&](const std::string& text, Answer gold) {
        auto [it, fresh] = gold_.emplace(text, gold);
        if (!fresh && it->second != gold) it->second.reset();
    };
    for (const auto& inst : dataset)
        for (std::size_t s = 0; s < kSlotsPerInstance && s <= inst.negatives.size(); ++s) {
            const Question& q = s == 0 ? inst.positive : inst.negatives[s - 1];
            add(inst.description + "\n\n" + q.text, q.gold);
            add(q.text, q.gold);
        }
}

std::optional<Answer> MockResponder::gold_for(const std::string& text) const {
    auto it = gold_.find(text);
    return it == gold_.end() ? std::nullopt : it->second;
}

json MockResponder::respond(const json& request) const {
    if (request.value("max_tokens", 0) != 1) throw DataError("mock expects max_tokens = 1");
    if (!request.value("logprobs", false)) throw DataError("mock expects logprobs = true");
    const std::string model = request.value("model", std::string("mock"));
    const std::string text = user_text(request);
    const Answer coin = mix64(fnv1a(text)) & 1 ? Answer::kYes : Answer::kNo;
    switch (options_.behavior) {
        case MockBehavior::kGold: return completion(model, confident(gold_for(text).value_or(coin)));
        case MockBehavior::kAlwaysYes: return completion(model, confident(Answer::kYes));
        case MockBehavior::kFixed: return completion(model, options_.fixed_top_logprobs);
        case MockBehavior::kDescriptionDependent: {
            const bool described = text.find("\n\n") != std::string::npos;
            return completion(model, confident(described ? gold_for(text).value_or(coin) : coin));
        }
        case MockBehavior::kNoLogprobs: {
            json r = completion(model, confident(Answer::kYes));
            r["choices"][0]["logprobs"] = nullptr;
            return r;
        }
    }
    return completion(model, {});
}

struct MockChatServer::Impl {
    httplib::Server server;
    std::thread thread;
};

MockChatServer::MockChatServer(const std::vector<QAInstance>& dataset, MockOptions options)
    : impl_(std::make_unique<Impl>()), responder_(dataset, std::move(options)) {
    impl_->server.Post(R"(/v1/chat/completions|/chat/completions)", [this](const httplib::Request& req,
                                                                          httplib::Response& res) {
        const std::size_t n = requests_.fetch_add(1);
        if (n < responder_.options().fail_first) {
            res.status = 503;
            res.set_content(R"({"error":"warming up"})", "application/json");
            return;
        }
        try {
            const json body = json::parse(req.body);
            if (const auto d = responder_.options().max_delay.count(); d > 0)
                std::this_thread::sleep_for(std::chrono::milliseconds(
                    mix64(fnv1a(req.body)) % static_cast<std::uint64_t>(d)));
            res.set_content(responder_.respond(body).dump(), "application/json");
        } catch (const std::exception& e) {
            res.status = 400;
            res.set_content(json({{"error", e.what()}}).dump(), "application/json");
        }
    });
    const auto& opt = responder_.options();
    if (opt.port == 0) {
        port_ = impl_->server.bind_to_any_port(opt.host);
    } else {
        port_ = impl_->server.bind_to_port(opt.host, opt.port) ? opt.port : -1;
    }
    if (port_ <= 0) throw ConfigError("mock server cannot bind " + opt.host + ":" + std::to_string(opt.port));
    impl_->thread = std::thread([this] { impl_->server.listen_after_bind(); });
    impl_->server.wait_until_ready();
}

MockChatServer::~MockChatServer() { stop(); }

std::string MockChatServer::base_url() const {
    return "http://" + responder_.options().host + ":" + std::to_string(port_) + "/v1";
}

void MockChatServer::stop() {
    if (!impl_) return;
    impl_->server.stop();
    if (impl_->thread.joinable()) impl_->thread.join();
}

void MockChatServer::wait() {
    if (impl_ && impl_->thread.joinable()) impl_->thread.join();
}

}  // namespace taxoqa
