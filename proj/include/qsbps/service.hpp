#pragma once

#include <charconv>
#include <chrono>
#include <cstdint>
#include <iomanip>
#include <memory>
#include <mutex>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <unordered_map>
#include <utility>

#include <httplib.h>
#include <json.hpp>

#include "qsbps/error.hpp"
#include "qsbps/session.hpp"
#include "qsbps/workspace.hpp"

namespace qsbps {

/// Session parameters used when a create request omits them.
struct ServiceDefaults {
    SelectionParams params;
    ErrorModel error_model;
    std::size_t n_q_limit = 10;
};

/// HTTP-independent core of the session service: every call returns a status
/// code and a JSON body.
class SessionService {
  public:
    using clock = std::chrono::steady_clock;

    struct Reply {
        int status = 200;
        nlohmann::json body;
    };

    SessionService(std::shared_ptr<const Workspace> ws, ServiceDefaults defaults = {},
                   std::chrono::milliseconds ttl = std::chrono::minutes(30))
        : m_ws(std::move(ws)), m_defaults(defaults), m_ttl(ttl) {}

    Reply list_topics() const {
        nlohmann::json topics = nlohmann::json::array();
        for (const auto& idx : m_ws->indexes) {
            topics.push_back({{"topic_id", idx.topic_id},
                              {"title", idx.topic_id},
                              {"size", idx.size()},
                              {"pool_size", idx.pool_size()}});
        }
        return {200, {{"topics", std::move(topics)}}};
    }

    Reply create_session(const std::string& topic_id, const std::string& body) {
        reap_expired(clock::now());
        auto pos = m_ws->find(topic_id);
        if (!pos) {
            return error(404, "unknown topic '" + topic_id + "'");
        }
        SessionOptions options{m_defaults.params, m_defaults.error_model, m_defaults.n_q_limit};
        if (auto bad = parse_session_params(body, options)) {
            return *bad;
        }
        auto entry = std::make_shared<Entry>(m_ws->models[*pos], m_ws->indexes[*pos], options);
        entry->last_used = clock::now();
        auto id = new_session_id();
        {
            std::lock_guard lock(m_mutex);
            m_sessions.emplace(id, entry);
        }
        std::lock_guard lock(entry->mutex);
        auto reply = state_body(entry->session);
        reply["session_id"] = id;
        return {201, std::move(reply)};
    }

    Reply answer(const std::string& session_id, const std::string& body) {
        auto entry = find(session_id);
        if (!entry) {
            return error(404, "unknown session '" + session_id + "'");
        }
        auto j = nlohmann::json::parse(body, nullptr, false);
        if (j.is_discarded() || !j.is_object()) {
            return error(422, "request body must be a JSON object", "$");
        }
        auto a = j.find("answer");
        if (a == j.end() || !a->is_string()) {
            return error(422, "answer must be one of \"yes\", \"no\", \"skip\"", "$.answer");
        }
        auto parsed = parse_answer(a->get<std::string>());
        if (!parsed) {
            return error(422, "answer must be one of \"yes\", \"no\", \"skip\"", "$.answer");
        }
        std::optional<std::size_t> expected;
        if (auto q = j.find("question_index"); q != j.end()) {
            if (!q->is_number_unsigned()) {
                return error(422, "question_index must be a non-negative integer", "$.question_index");
            }
            expected = q->get<std::size_t>();
        }

        std::unique_lock lock(entry->mutex, std::try_to_lock);
        if (!lock.owns_lock()) {
            return error(409, "another answer for this session is being processed");
        }
        entry->last_used = clock::now();
        auto& s = entry->session;
        if (s.finished()) {
            return error(409, "session is finished");
        }
        if (expected && *expected != s.question_count()) {
            return error(409, "question " + std::to_string(*expected) + " was already answered");
        }
        s.submit_answer(*parsed);
        auto reply = state_body(s);
        reply["next_question"] = reply["question"];
        return {200, std::move(reply)};
    }

    Reply ranking(const std::string& session_id, std::size_t k) {
        auto entry = find(session_id);
        if (!entry) {
            return error(404, "unknown session '" + session_id + "'");
        }
        std::lock_guard lock(entry->mutex);
        entry->last_used = clock::now();
        return {200, {{"ranking", ranking_json(entry->session, k)}}};
    }

    Reply transcript(const std::string& session_id) {
        auto entry = find(session_id);
        if (!entry) {
            return error(404, "unknown session '" + session_id + "'");
        }
        std::lock_guard lock(entry->mutex);
        entry->last_used = clock::now();
        return {200, entry->session.transcript()};
    }

    /// Drops sessions idle for longer than the TTL. Returns how many were removed.
    std::size_t reap_expired(clock::time_point now) {
        std::lock_guard lock(m_mutex);
        std::size_t removed = 0;
        for (auto it = m_sessions.begin(); it != m_sessions.end();) {
            bool expired = false;
            {
                std::unique_lock entry_lock(it->second->mutex, std::try_to_lock);
                expired = entry_lock.owns_lock() && now - it->second->last_used > m_ttl;
            }
            if (expired) {
                it = m_sessions.erase(it);
                ++removed;
            } else {
                ++it;
            }
        }
        return removed;
    }

    [[nodiscard]] std::size_t session_count() const {
        std::lock_guard lock(m_mutex);
        return m_sessions.size();
    }

    static std::string prompt(const std::string& entity_label) { return "Are you interested in " + entity_label + "?"; }

  private:
    struct Entry {
        Entry(const TrainedModel& model, const TopicIndex& index, SessionOptions options)
            : session(model, index, options) {}
        std::mutex mutex;
        Session session;
        clock::time_point last_used;
    };

    static Reply error(int status, const std::string& message, const std::string& field = {}) {
        nlohmann::json body{{"error", message}};
        if (!field.empty()) {
            body["field"] = field;
        }
        return {status, std::move(body)};
    }

    static std::optional<Reply> parse_session_params(const std::string& body, SessionOptions& options) {
        if (body.find_first_not_of(" \t\r\n") == std::string::npos) {
            return std::nullopt;
        }
        auto j = nlohmann::json::parse(body, nullptr, false);
        if (j.is_discarded() || !j.is_object()) {
            return error(422, "request body must be a JSON object", "$");
        }
        for (const char* key : {"gamma", "beta"}) {
            if (auto v = j.find(key); v != j.end()) {
                if (!v->is_number() || !std::isfinite(v->get<double>()) || v->get<double>() < 0) {
                    return error(422, std::string(key) + " must be a finite non-negative number", std::string("$.") + key);
                }
                (std::string_view(key) == "gamma" ? options.params.gamma : options.params.beta) = v->get<double>();
            }
        }
        if (auto v = j.find("error_model"); v != j.end()) {
            if (!v->is_string()) {
                return error(422, "error_model must be a string", "$.error_model");
            }
            try {
                options.error_model = parse_error_model(v->get<std::string>());
            } catch (const usage_error& e) {
                return error(422, e.what(), "$.error_model");
            }
        }
        if (auto v = j.find("n_q_limit"); v != j.end()) {
            if (!v->is_number_unsigned()) {
                return error(422, "n_q_limit must be a non-negative integer", "$.n_q_limit");
            }
            options.n_q_limit = v->get<std::size_t>();
        }
        return std::nullopt;
    }

    static nlohmann::json ranking_json(const Session& s, std::size_t k) {
        nlohmann::json out = nlohmann::json::array();
        for (const auto& r : s.final_ranking(k)) {
            out.push_back({{"product_id", s.index().product_ids[r.product]}, {"score", r.score}});
        }
        return out;
    }

    static nlohmann::json state_body(const Session& s) {
        nlohmann::json j;
        j["status"] = s.finished() ? "finished" : "awaiting_answer";
        j["question_count"] = s.question_count();
        if (auto q = s.current_question()) {
            const auto& label = s.index().entity_labels[*q];
            j["question"] = {{"entity_id", s.index().entities[*q]},
                             {"entity_label", label},
                             {"prompt", prompt(label)},
                             {"question_index", s.question_count()}};
        } else {
            j["question"] = nullptr;
        }
        j["top"] = ranking_json(s, 10);
        return j;
    }

    std::shared_ptr<Entry> find(const std::string& id) {
        reap_expired(clock::now());
        std::lock_guard lock(m_mutex);
        auto it = m_sessions.find(id);
        return it == m_sessions.end() ? nullptr : it->second;
    }

    std::string new_session_id() {
        std::lock_guard lock(m_mutex);
        std::ostringstream os;
        os << std::hex << std::setfill('0');
        for (int i = 0; i < 4; ++i) {
            os << std::setw(8) << m_random();
        }
        return os.str();
    }

    std::shared_ptr<const Workspace> m_ws;
    ServiceDefaults m_defaults;
    std::chrono::milliseconds m_ttl;
    mutable std::mutex m_mutex;
    std::unordered_map<std::string, std::shared_ptr<Entry>> m_sessions;
    std::random_device m_random;
};

/// Registers the JSON API on an httplib server. CORS is open for browser clients.
inline void bind_routes(httplib::Server& server, SessionService& service) {
    auto send = [](httplib::Response& res, const SessionService::Reply& r) {
        res.status = r.status;
        res.set_content(r.body.dump(), "application/json");
    };
    server.set_default_headers({{"Access-Control-Allow-Origin", "*"},
                                {"Access-Control-Allow-Methods", "GET, POST, OPTIONS"},
                                {"Access-Control-Allow-Headers", "Content-Type"}});
    server.Options(R"(.*)", [](const httplib::Request&, httplib::Response& res) { res.status = 204; });
    server.Get("/topics", [&service, send](const httplib::Request&, httplib::Response& res) {
        send(res, service.list_topics());
    });
    server.Post(R"(/topics/([^/]+)/sessions)", [&service, send](const httplib::Request& req, httplib::Response& res) {
        send(res, service.create_session(req.matches[1], req.body));
    });
    server.Post(R"(/sessions/([^/]+)/answer)", [&service, send](const httplib::Request& req, httplib::Response& res) {
        send(res, service.answer(req.matches[1], req.body));
    });
    server.Get(R"(/sessions/([^/]+)/ranking)", [&service, send](const httplib::Request& req, httplib::Response& res) {
        std::size_t k = 10;
        if (req.has_param("k")) {
            const auto text = req.get_param_value("k");
            auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), k);
            if (text.empty() || ec != std::errc{} || end != text.data() + text.size()) {
                send(res, {422, {{"error", "k must be a non-negative integer"}, {"field", "k"}}});
                return;
            }
        }
        send(res, service.ranking(req.matches[1], k));
    });
    server.Get(R"(/sessions/([^/]+)/transcript)", [&service, send](const httplib::Request& req,
                                                                   httplib::Response& res) {
        send(res, service.transcript(req.matches[1]));
    });
}

}  // namespace qsbps
