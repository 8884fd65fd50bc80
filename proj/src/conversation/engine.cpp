#include "remi/conversation/engine.hpp"

#include "remi/core/error.hpp"
#include "remi/core/log.hpp"
#include "remi/text/tokenize.hpp"

#include <algorithm>

namespace remi::conversation {

double readiness_score(const ReadinessState& state, const ReadinessConfig& config) {
    double e = config.entity_threshold > 0 ? static_cast<double>(state.entity_count()) / config.entity_threshold : 0;
    double t = config.turn_threshold > 0 ? static_cast<double>(state.user_turn_count) / config.turn_threshold : 0;
    return std::max(e, t);
}

bool readiness_reached(const ReadinessState& state, const ReadinessConfig& config) {
    return (config.entity_threshold > 0 && state.entity_count() >= config.entity_threshold) ||
           (config.turn_threshold > 0 && state.user_turn_count >= config.turn_threshold);
}

void record_user_turn(ReadinessState& state, const std::vector<std::string>& entities) {
    ++state.user_turn_count;
    for (const auto& e : entities)
        if (std::find(state.entities.begin(), state.entities.end(), e) == state.entities.end())
            state.entities.push_back(e);
}

ConversationEngine::ConversationEngine(ConversationDeps deps, ConversationConfig config)
    : deps_(deps), config_(config) {
    if (config_.context_turns == 0) throw Error(ErrorCode::validation, "context_turns must be positive");
}

Session ConversationEngine::load(const std::string& session_id) const {
    auto s = deps_.sessions.get(session_id);
    if (!s) throw_not_found("session " + session_id);
    return *s;
}

int ConversationEngine::current_year() const { return year_of(deps_.clock.now()); }

Session ConversationEngine::start_session(const std::string& user_id, PersonaMode mode) {
    if (!deps_.profiles.contains(user_id)) throw_not_found("user " + user_id);
    Session s;
    s.session_id = deps_.ids.next("ses");
    s.user_id = user_id;
    s.mode = mode;
    s.created_at = deps_.clock.now();
    deps_.sessions.put(s.session_id, s);
    return s;
}

Session ConversationEngine::get_session(const std::string& session_id) const { return load(session_id); }

std::vector<Session> ConversationEngine::list_sessions(const std::string& user_id) const {
    std::vector<Session> out;
    for (auto& s : deps_.sessions.all())
        if (user_id.empty() || s.user_id == user_id) out.push_back(std::move(s));
    std::sort(out.begin(), out.end(), [](const Session& a, const Session& b) {
        if (a.created_at != b.created_at) return a.created_at > b.created_at;
        return a.session_id < b.session_id;
    });
    return out;
}

void ConversationEngine::close_session(const std::string& session_id) {
    cancel_stream(session_id);
    auto lock = session_locks_.lock(session_id);
    auto s = load(session_id);
    if (s.status == SessionStatus::generating) throw Error(ErrorCode::conflict, "session is generating materials");
    s.status = SessionStatus::closed;
    deps_.sessions.put(session_id, s);
}

std::string ConversationEngine::system_prompt(const std::string& session_id) const {
    auto s = load(session_id);
    auto profile = deps_.profiles.get(s.user_id);
    if (!profile) throw_not_found("user " + s.user_id);
    return prompt::assemble_system_prompt(s.mode, *profile, deps_.knowledge.get(s.user_id), s.readiness,
                                          deps_.prompts, config_.k, current_year());
}

providers::ChatRequest ConversationEngine::context_request(const Session& session) const {
    auto profile = deps_.profiles.get(session.user_id);
    if (!profile) throw_not_found("user " + session.user_id);
    providers::ChatRequest req;
    req.purpose = providers::ChatPurpose::conversation;
    req.stream = true;
    auto system = prompt::assemble_system_prompt(session.mode, *profile, deps_.knowledge.get(session.user_id),
                                                 session.readiness, deps_.prompts, config_.k, current_year());
    req.system_prompt = prompt::with_summary(system, session.summary, deps_.prompts);

    const auto& t = session.transcript;
    std::size_t first = t.size() > config_.context_turns ? t.size() - config_.context_turns : 0;
    for (std::size_t i = first; i < t.size(); ++i) {
        if (t[i].text.empty()) continue;
        req.messages.push_back({t[i].speaker == Speaker::user ? "user" : "assistant", t[i].text});
    }
    req.hints = session.readiness.entities;
    return req;
}

std::string ConversationEngine::resolve_text(const TurnInput& input, const UserProfile& profile) const {
    std::string text = text::collapse_whitespace(input.text);
    if (text.empty() && input.audio_ref) {
        if (!deps_.transcribe || !deps_.media)
            throw Error(ErrorCode::precondition, "no transcription provider configured");
        auto audio = deps_.media->require(*input.audio_ref);
        try {
            text = text::collapse_whitespace(deps_.transcribe->transcribe(audio, profile.locale));
        } catch (const providers::ProviderError& e) {
            throw Error(ErrorCode::provider, std::string("transcription failed: ") + e.what());
        }
    }
    if (text.empty())
        throw Error(ErrorCode::validation, "empty turn", {{"text", "required", "text or a transcribable audio_ref"}});
    if (text.size() > config_.max_turn_chars)
        throw Error(ErrorCode::validation, "turn too long",
                    {{"text", "too_long", "at most " + std::to_string(config_.max_turn_chars) + " bytes"}});
    return text;
}

std::shared_ptr<ConversationEngine::StreamSlot> ConversationEngine::slot(const std::string& session_id) {
    std::lock_guard lock(slots_mutex_);
    auto& s = slots_[session_id];
    if (!s) s = std::make_shared<StreamSlot>();
    return s;
}

void ConversationEngine::cancel_stream(const std::string& session_id) {
    auto sl = slot(session_id);
    std::lock_guard lock(sl->control);
    if (sl->token) sl->token->cancel();
}

void ConversationEngine::maybe_summarize(Session& session) {
    auto size = static_cast<std::int64_t>(session.transcript.size());
    auto keep_from = size - static_cast<std::int64_t>(config_.context_turns);
    if (keep_from <= session.summarized_through) return;

    providers::ChatRequest req;
    req.purpose = providers::ChatPurpose::summary;
    req.stream = false;
    req.system_prompt = prompt::render_summary_instruction(session.summary, deps_.prompts);
    for (auto i = session.summarized_through; i < keep_from; ++i) {
        const auto& t = session.transcript[static_cast<std::size_t>(i)];
        if (!t.text.empty()) req.messages.push_back({t.speaker == Speaker::user ? "user" : "assistant", t.text});
    }
    req.hints = {std::to_string(keep_from)};
    try {
        auto summary = providers::with_retry(config_.retry, [&] { return deps_.chat.complete(req); });
        session.summary = text::collapse_whitespace(summary);
        session.summarized_through = keep_from;
    } catch (const providers::ProviderError& e) {
        // The older turns simply fall out of context until the next attempt.
        log::warn("conversation", "summary failed for " + session.session_id + ": " + e.what());
    }
}

TurnResult ConversationEngine::submit_user_turn(const std::string& session_id, const TurnInput& input,
                                                const providers::ChunkSink& sink) {
    // Validate before touching any in-flight stream.
    Session pre = load(session_id);
    if (pre.status == SessionStatus::closed) throw Error(ErrorCode::conflict, "session is closed");
    auto profile = deps_.profiles.get(pre.user_id);
    if (!profile) throw_not_found("user " + pre.user_id);
    std::string text = resolve_text(input, *profile);

    // Supersede any running stream, then take the session's single stream slot.
    auto sl = slot(session_id);
    std::uint64_t ticket;
    {
        std::lock_guard lock(sl->control);
        ticket = ++sl->latest_ticket;
        if (sl->token) sl->token->cancel();
    }
    std::unique_lock run(sl->run);
    auto token = std::make_shared<providers::CancelToken>();
    {
        std::lock_guard lock(sl->control);
        sl->token = token;
        if (sl->latest_ticket != ticket) token->cancel();  // an even newer turn is waiting
    }

    TurnResult result;
    providers::ChatRequest req;
    {
        auto lock = session_locks_.lock(session_id);
        Session s = load(session_id);
        if (s.status == SessionStatus::closed) throw Error(ErrorCode::conflict, "session is closed");
        text::EntityDetector detector(deps_.lexicons.for_locale(profile->locale), profile->locale);

        Turn user;
        user.turn_index = static_cast<std::int64_t>(s.transcript.size());
        user.speaker = Speaker::user;
        user.text = text;
        user.audio_ref = input.audio_ref;
        user.timestamp = deps_.clock.now();
        s.transcript.push_back(user);
        record_user_turn(s.readiness, detector.distinct(text));
        s.readiness_score = std::max(s.readiness_score, readiness_score(s.readiness, config_.readiness));
        deps_.sessions.put(session_id, s);
        result.user_turn = user;
        req = context_request(s);
    }

    std::string reply;
    std::optional<std::string> error;
    bool client_gone = false;
    auto forward = [&](std::string_view chunk) {
        if (chunk.empty() || client_gone) return;
        if (sink) {
            try {
                sink(chunk);
            } catch (...) {
                client_gone = true;
                token->cancel();
                return;
            }
        }
        reply.append(chunk);
    };
    for (int attempt = 0;; ++attempt) {
        try {
            auto end = deps_.chat.stream(req, forward, *token);
            if (end == providers::StreamEnd::cancelled || token->cancelled()) error = "cancelled";
            break;
        } catch (const providers::ProviderError& e) {
            if (token->cancelled()) {
                error = "cancelled";
                break;
            }
            bool retry = e.kind() == providers::FailureKind::timeout && reply.empty() &&
                         attempt < config_.retry.timeout_retries;
            if (retry) continue;
            error = "provider_error: " + std::string(providers::to_string(e.kind()));
            log::warn("conversation", "stream failed for " + session_id + ": " + e.what());
            break;
        }
    }

    {
        auto lock = session_locks_.lock(session_id);
        Session s = load(session_id);
        Turn assistant;
        assistant.turn_index = static_cast<std::int64_t>(s.transcript.size());
        assistant.speaker = Speaker::assistant;
        assistant.text = reply;
        assistant.timestamp = deps_.clock.now();
        assistant.error = error;
        s.transcript.push_back(assistant);
        result.assistant_turn = assistant;

        if (!error && !s.readiness.offered && readiness_reached(s.readiness, config_.readiness)) {
            Turn offer;
            offer.turn_index = static_cast<std::int64_t>(s.transcript.size());
            offer.speaker = Speaker::assistant;
            offer.kind = TurnKind::generation_offer;
            offer.text = prompt::render_offer(s.readiness.entities, deps_.prompts);
            offer.timestamp = deps_.clock.now();
            s.transcript.push_back(offer);
            s.readiness.offered = true;
            result.offer_turn = offer;
        }
        maybe_summarize(s);
        deps_.sessions.put(session_id, s);
        result.readiness_score = s.readiness_score;
    }

    {
        std::lock_guard lock(sl->control);
        if (sl->token == token) sl->token.reset();
    }
    return result;
}

std::string ConversationEngine::request_generation(const std::string& session_id,
                                                   const std::function<std::string(const Session&)>& enqueue) {
    auto lock = session_locks_.lock(session_id);
    Session s = load(session_id);
    if (s.status == SessionStatus::generating)
        throw Error(ErrorCode::conflict, "a generation job is already running for this session");
    if (s.status == SessionStatus::closed) throw Error(ErrorCode::conflict, "session is closed");
    bool has_user_turn = std::any_of(s.transcript.begin(), s.transcript.end(), [](const Turn& t) {
        return t.speaker == Speaker::user && t.kind == TurnKind::message;
    });
    if (!has_user_turn) throw Error(ErrorCode::precondition, "the conversation has no user turns yet");
    std::string job_id = enqueue(s);
    s.status = SessionStatus::generating;
    deps_.sessions.put(session_id, s);
    return job_id;
}

void ConversationEngine::finish_generation(const std::string& session_id,
                                           const std::optional<std::string>& material_id) {
    auto lock = session_locks_.lock(session_id);
    Session s = load(session_id);
    if (s.status == SessionStatus::generating) s.status = SessionStatus::active;
    if (material_id &&
        std::find(s.material_ids.begin(), s.material_ids.end(), *material_id) == s.material_ids.end())
        s.material_ids.push_back(*material_id);
    deps_.sessions.put(session_id, s);
}

}  // namespace remi::conversation
