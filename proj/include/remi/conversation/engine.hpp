#pragma once

#include "remi/core/clock.hpp"
#include "remi/core/store.hpp"
#include "remi/core/types.hpp"
#include "remi/knowledge/knowledge.hpp"
#include "remi/media/media_store.hpp"
#include "remi/prompt/prompt.hpp"
#include "remi/providers/provider.hpp"

#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

namespace remi::conversation {

// Offer generation once entity_count >= entities OR user_turn_count >= turns.
struct ReadinessConfig {
    int entity_threshold = 3;
    int turn_threshold = 5;
};

// max(entity_count / entity_threshold, user_turn_count / turn_threshold);
// reaches 1.0 exactly when the threshold is met. Both counts only grow, so
// the score is monotone over a session.
double readiness_score(const ReadinessState& state, const ReadinessConfig& config);
bool readiness_reached(const ReadinessState& state, const ReadinessConfig& config);

// Counts one user turn and merges its entities (distinct, first-mention order).
void record_user_turn(ReadinessState& state, const std::vector<std::string>& entities);

struct ConversationConfig {
    ReadinessConfig readiness;
    std::size_t context_turns = 20;  // turns sent verbatim; older ones are summarized
    std::size_t k = 6;               // facts in the in_town system prompt
    std::size_t max_turn_chars = 4000;
    providers::RetryPolicy retry;
};

struct ConversationDeps {
    DocumentStore<UserProfile>& profiles;
    DocumentStore<Session>& sessions;
    knowledge::KnowledgeStore& knowledge;
    const prompt::PromptLibrary& prompts;
    const text::LexiconSet& lexicons;
    providers::ChatProvider& chat;
    const Clock& clock;
    IdGenerator& ids;
    providers::TranscribeProvider* transcribe = nullptr;
    media::MediaStore* media = nullptr;
};

struct TurnInput {
    std::string text;
    std::optional<std::string> audio_ref;  // transcribed when text is empty
};

struct TurnResult {
    Turn user_turn;
    Turn assistant_turn;  // error set when cancelled or the provider failed
    std::optional<Turn> offer_turn;
    double readiness_score = 0.0;
};

class ConversationEngine {
public:
    ConversationEngine(ConversationDeps deps, ConversationConfig config = {});

    Session start_session(const std::string& user_id, PersonaMode mode);
    Session get_session(const std::string& session_id) const;
    // Newest first; all users when user_id is empty.
    std::vector<Session> list_sessions(const std::string& user_id = {}) const;
    void close_session(const std::string& session_id);

    std::string system_prompt(const std::string& session_id) const;
    // What the chat provider would receive for the session's next reply.
    providers::ChatRequest context_request(const Session& session) const;

    // Appends the user turn, streams the reply through `sink`, then appends
    // the assistant turn (and the generation offer when readiness is first
    // reached). A newer submit on the same session cancels this stream; the
    // partial reply is persisted with error "cancelled".
    TurnResult submit_user_turn(const std::string& session_id, const TurnInput& input,
                                const providers::ChunkSink& sink = {});

    // Cancels the session's in-flight stream, if any.
    void cancel_stream(const std::string& session_id);

    // Checks the preconditions, then calls `enqueue` with the session as it
    // stands (the job snapshot) and marks the session generating. Returns
    // enqueue's job id. Nothing changes when enqueue throws.
    std::string request_generation(const std::string& session_id,
                                   const std::function<std::string(const Session&)>& enqueue);
    // Back to active; appends the material when the job produced one.
    void finish_generation(const std::string& session_id, const std::optional<std::string>& material_id);

    const ConversationConfig& config() const { return config_; }

private:
    struct StreamSlot {
        std::mutex control;
        std::mutex run;
        std::shared_ptr<providers::CancelToken> token;
        std::uint64_t latest_ticket = 0;
    };

    std::shared_ptr<StreamSlot> slot(const std::string& session_id);
    Session load(const std::string& session_id) const;
    int current_year() const;
    std::string resolve_text(const TurnInput& input, const UserProfile& profile) const;
    void maybe_summarize(Session& session);

    ConversationDeps deps_;
    ConversationConfig config_;
    mutable KeyedMutex session_locks_;
    std::mutex slots_mutex_;
    std::map<std::string, std::shared_ptr<StreamSlot>> slots_;
};

}  // namespace remi::conversation
