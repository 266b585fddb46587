#pragma once

#include <array>
#include <chrono>
#include <cstddef>
#include <deque>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "acre/events.hpp"
#include "acre/protocol.hpp"
#include "acre/term.hpp"

namespace acre {

enum class Direction { Sent, Received };
enum class ConversationStatus { Active, Completed, Failed };

std::string_view to_string(Direction d) noexcept;
std::string_view to_string(ConversationStatus s) noexcept;

struct Message {
    std::string sender;
    std::string receiver;
    std::optional<std::string> conversation_id;
    std::optional<ProtocolId> protocol;
    std::string performative;
    Term content = Term::anonymous();

    /// Lowercases the performative and checks that content is ground and the
    /// agent fields are non-empty. Throws std::invalid_argument / NonGroundValue.
    static Message make(std::string sender, std::string receiver, std::string performative, Term content,
                        std::optional<std::string> conversation_id = std::nullopt,
                        std::optional<ProtocolId> protocol = std::nullopt);

    /// FIPA-style rendering, e.g. "(inform :sender a :receiver b :content ready)"
    std::string str() const;

    friend bool operator==(const Message&, const Message&) = default;
};

struct HistoryEntry {
    Message message;
    Direction direction;
    Transition transition;
};

struct Conversation {
    std::string id;
    std::shared_ptr<const Protocol> protocol;
    std::array<std::string, 2> participants;  // initiating sender, initiating receiver
    std::string state;
    BindingSet bindings;
    ConversationStatus status = ConversationStatus::Active;
    std::deque<HistoryEntry> history;
};

struct SnapshotRow {
    std::string conversation_id;
    ProtocolId protocol;
    std::array<std::string, 2> participants;
    /// The other participant, when the manager knows which agent it serves.
    std::optional<std::string> counterpart;
    std::string state;
    ConversationStatus status;
    BindingSet bindings;

    friend bool operator==(const SnapshotRow&, const SnapshotRow&) = default;
};

/// Matches one transition against a message under a conversation's bindings.
/// Returns the bindings the transition acquires (get_bindings over sender,
/// receiver and content jointly) or nullopt when it does not match.
std::optional<BindingSet> match_transition(const Transition& t, const BindingSet& bound, const Message& m);

struct Candidate {
    std::string conversation_id;
    const Transition* transition;
};

struct NewCandidate {
    std::shared_ptr<const Protocol> protocol;
    const Transition* transition;
};

struct CandidateScan {
    std::vector<Candidate> candidates;
    /// Conversations named by the message that it cannot advance.
    std::vector<std::string> failed;
};

struct NewCandidateScan {
    std::vector<NewCandidate> candidates;
    std::string diagnostic;
};

class ConversationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Tracks the conversations of one agent (or of an omniscient observer).
/// Not thread-safe: callers serialize mutating calls.
class ConversationManager {
public:
    using IdGenerator = std::function<std::string()>;
    using Clock = std::function<std::chrono::system_clock::time_point()>;
    using Listener = std::function<void(const EngineEvent&)>;

    struct Options {
        IdGenerator next_id;  // default: "acre-1", "acre-2", ...
        Clock clock;          // default: system clock
        std::optional<std::size_t> history_cap;
        std::optional<std::string> self;
    };

    ConversationManager();
    explicit ConversationManager(Options options);

    void add_protocol(std::shared_ptr<const Protocol> resolved);
    const Protocol* find_protocol(const ProtocolId& id) const;
    void subscribe(Listener listener);

    std::vector<EngineEvent> ingest(const Message& m, Direction direction);

    CandidateScan candidate_conversations(const Message& m) const;
    NewCandidateScan candidate_new_conversations(const Message& m) const;

    /// Next unused id from the generator.
    std::string next_id();

    struct AdvanceResult {
        Message message;
        std::vector<EngineEvent> events;
    };
    /// Builds the full outgoing message for the one transition compatible
    /// with (performative, content) and ingests it as sent.
    AdvanceResult advance_conversation(const std::string& conversation_id, std::string performative,
                                       const Term& content);

    std::vector<SnapshotRow> snapshot() const;
    const Conversation* find(const std::string& conversation_id) const;
    std::size_t size() const noexcept { return conversations_.size(); }

    /// Drops completed and failed conversations. Their ids stay reserved.
    std::size_t purge_terminated();

private:
    Conversation* find_mutable(const std::string& id);
    EngineEvent make_event(EventKind kind, std::optional<std::string> conv, std::optional<ProtocolId> proto,
                           std::string detail) const;
    void fire(Conversation& c, const Transition& t, const Message& m, Direction d, std::vector<EngineEvent>& out);

    Options options_;
    std::size_t counter_ = 0;
    std::map<ProtocolId, std::shared_ptr<const Protocol>> protocols_;
    std::vector<Conversation> conversations_;  // creation order
    std::set<std::string, std::less<>> used_ids_;
    std::vector<Listener> listeners_;
};

}  // namespace acre
