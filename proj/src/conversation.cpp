#include "acre/conversation.hpp"

#include <algorithm>
#include <cctype>

namespace acre {

std::string_view to_string(Direction d) noexcept { return d == Direction::Sent ? "sent" : "received"; }

std::string_view to_string(ConversationStatus s) noexcept {
    switch (s) {
        case ConversationStatus::Active: return "active";
        case ConversationStatus::Completed: return "completed";
        case ConversationStatus::Failed: return "failed";
    }
    return "unknown";
}

namespace {

std::string lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return s;
}

void validate(const Message& m) {
    if (m.sender.empty()) throw std::invalid_argument("message has no sender");
    if (m.receiver.empty()) throw std::invalid_argument("message has no receiver");
    if (m.performative.empty()) throw std::invalid_argument("message has no performative");
    if (!m.content.is_ground()) throw NonGroundValue("message content is not ground: " + render_term(m.content));
}

}  // namespace

Message Message::make(std::string sender, std::string receiver, std::string performative, Term content,
                      std::optional<std::string> conversation_id, std::optional<ProtocolId> protocol) {
    Message m{std::move(sender),  std::move(receiver),           std::move(conversation_id),
              std::move(protocol), lower(std::move(performative)), std::move(content)};
    validate(m);
    return m;
}

std::string Message::str() const {
    std::string out = "(" + performative + " :sender " + render_term(Term::constant(sender)) + " :receiver " +
                      render_term(Term::constant(receiver)) + " :content " + render_term(content);
    if (conversation_id) out += " :conversation-id " + *conversation_id;
    if (protocol) out += " :protocol " + protocol->str();
    out += ")";
    return out;
}

std::optional<BindingSet> match_transition(const Transition& t, const BindingSet& bound, const Message& m) {
    if (t.performative != m.performative) return std::nullopt;
    BindingSet captured;
    if (!match_capture(apply(bound, t.sender), Term::constant(m.sender), captured)) return std::nullopt;
    if (!match_capture(apply(bound, t.receiver), Term::constant(m.receiver), captured)) return std::nullopt;
    if (!match_capture(apply(bound, t.content), m.content, captured)) return std::nullopt;
    return captured;
}

// ---------------------------------------------------------------------------

ConversationManager::ConversationManager() : ConversationManager(Options{}) {}

ConversationManager::ConversationManager(Options options) : options_(std::move(options)) {
    if (!options_.clock) options_.clock = [] { return std::chrono::system_clock::now(); };
}

void ConversationManager::add_protocol(std::shared_ptr<const Protocol> resolved) {
    if (!resolved || !resolved->resolved) throw std::invalid_argument("add_protocol needs a resolved protocol");
    protocols_[resolved->id] = std::move(resolved);
}

const Protocol* ConversationManager::find_protocol(const ProtocolId& id) const {
    auto it = protocols_.find(id);
    return it == protocols_.end() ? nullptr : it->second.get();
}

void ConversationManager::subscribe(Listener listener) { listeners_.push_back(std::move(listener)); }

std::string ConversationManager::next_id() {
    // Skip ids already taken by messages that named their own.
    for (int attempt = 0; attempt < 1000; ++attempt) {
        std::string id = options_.next_id ? options_.next_id() : "acre-" + std::to_string(++counter_);
        if (!used_ids_.contains(id)) return id;
    }
    throw ConversationError("id generator keeps returning ids already in use");
}

const Conversation* ConversationManager::find(const std::string& id) const {
    for (const auto& c : conversations_)
        if (c.id == id) return &c;
    return nullptr;
}

Conversation* ConversationManager::find_mutable(const std::string& id) {
    return const_cast<Conversation*>(std::as_const(*this).find(id));
}

EngineEvent ConversationManager::make_event(EventKind kind, std::optional<std::string> conv,
                                            std::optional<ProtocolId> proto, std::string detail) const {
    return EngineEvent{kind, std::move(conv), std::move(proto), std::move(detail), options_.clock()};
}

CandidateScan ConversationManager::candidate_conversations(const Message& m) const {
    CandidateScan scan;
    for (const auto& c : conversations_) {
        if (c.status != ConversationStatus::Active) continue;
        if (m.conversation_id && *m.conversation_id != c.id) continue;
        bool contributed = false;
        if (!m.protocol || *m.protocol == c.protocol->id) {
            for (const Transition* t : c.protocol->transitions_from(c.state)) {
                if (match_transition(*t, c.bindings, m)) {
                    scan.candidates.push_back({c.id, t});
                    contributed = true;
                }
            }
        }
        if (m.conversation_id && !contributed) scan.failed.push_back(c.id);
    }
    return scan;
}

NewCandidateScan ConversationManager::candidate_new_conversations(const Message& m) const {
    NewCandidateScan scan;
    if (m.conversation_id && used_ids_.contains(*m.conversation_id)) {
        scan.diagnostic = "conversation id " + *m.conversation_id + " is already in use";
        return scan;
    }
    if (m.protocol && !protocols_.contains(*m.protocol)) {
        scan.diagnostic = "unknown protocol " + m.protocol->str();
        return scan;
    }
    for (const auto& [id, p] : protocols_) {
        if (m.protocol && *m.protocol != id) continue;
        for (const Transition* t : p->transitions_from(p->initial_state()))
            if (match_transition(*t, {}, m)) scan.candidates.push_back({p, t});
    }
    return scan;
}

void ConversationManager::fire(Conversation& c, const Transition& t, const Message& m, Direction d,
                               std::vector<EngineEvent>& out) {
    auto acquired = match_transition(t, c.bindings, m);
    if (!acquired) throw std::logic_error("fire: transition no longer matches");
    c.bindings.merge_overwrite(*acquired);
    std::string from = std::exchange(c.state, t.to_state);
    c.history.push_back({m, d, t});
    if (options_.history_cap) {
        while (c.history.size() > *options_.history_cap) c.history.pop_front();
    }
    std::string detail = from + " -> " + c.state + " on " + m.performative + " " + render_term(m.content);
    if (c.protocol->is_terminal(c.state)) {
        c.status = ConversationStatus::Completed;
        out.push_back(make_event(EventKind::Completed, c.id, c.protocol->id, std::move(detail)));
    } else {
        out.push_back(make_event(EventKind::Advanced, c.id, c.protocol->id, std::move(detail)));
    }
}

std::vector<EngineEvent> ConversationManager::ingest(const Message& m, Direction direction) {
    validate(m);
    std::vector<EngineEvent> events;

    CandidateScan scan = candidate_conversations(m);
    for (const auto& id : scan.failed) {
        Conversation* c = find_mutable(id);
        c->status = ConversationStatus::Failed;
        std::string why = m.protocol && *m.protocol != c->protocol->id
                              ? "message names protocol " + m.protocol->str()
                              : "no transition from " + c->state + " matches";
        events.push_back(make_event(EventKind::Failed, c->id, c->protocol->id, why + ": " + m.str()));
    }

    if (scan.candidates.size() == 1) {
        const auto& cand = scan.candidates.front();
        fire(*find_mutable(cand.conversation_id), *cand.transition, m, direction, events);
    } else if (scan.candidates.size() > 1) {
        std::string detail = std::to_string(scan.candidates.size()) + " candidates for " + m.str() + ":";
        for (const auto& cand : scan.candidates)
            detail += " " + cand.conversation_id + "[" + cand.transition->from_state + "->" +
                      cand.transition->to_state + "]";
        events.push_back(make_event(EventKind::Ambiguous, std::nullopt, std::nullopt, std::move(detail)));
    } else {
        NewCandidateScan fresh = candidate_new_conversations(m);
        if (fresh.candidates.size() == 1) {
            const auto& cand = fresh.candidates.front();
            Conversation c;
            c.id = m.conversation_id ? *m.conversation_id : next_id();
            c.protocol = cand.protocol;
            c.participants = {m.sender, m.receiver};
            c.state = cand.protocol->initial_state();
            used_ids_.insert(c.id);
            conversations_.push_back(std::move(c));
            Conversation& created = conversations_.back();
            events.push_back(make_event(EventKind::ConversationBegun, created.id, created.protocol->id,
                                        "between " + m.sender + " and " + m.receiver));
            fire(created, *cand.transition, m, direction, events);
        } else if (fresh.candidates.size() > 1) {
            std::string detail = std::to_string(fresh.candidates.size()) + " protocols could start " + m.str() + ":";
            for (const auto& cand : fresh.candidates) detail += " " + cand.protocol->id.str();
            events.push_back(make_event(EventKind::Ambiguous, std::nullopt, std::nullopt, std::move(detail)));
        } else {
            std::string detail = m.str();
            if (!fresh.diagnostic.empty()) detail += " (" + fresh.diagnostic + ")";
            events.push_back(make_event(EventKind::Unmatched, m.conversation_id, m.protocol, std::move(detail)));
        }
    }

    for (const auto& e : events)
        for (const auto& l : listeners_) l(e);
    return events;
}

ConversationManager::AdvanceResult ConversationManager::advance_conversation(const std::string& conversation_id,
                                                                             std::string performative,
                                                                             const Term& content) {
    const Conversation* c = find(conversation_id);
    if (c == nullptr) throw ConversationError("unknown conversation " + conversation_id);
    if (c->status != ConversationStatus::Active)
        throw ConversationError("conversation " + conversation_id + " is " + std::string(to_string(c->status)));
    if (!content.is_ground()) throw NonGroundValue("content is not ground: " + render_term(content));
    performative = lower(std::move(performative));

    std::vector<const Transition*> compatible;
    std::string available;
    for (const Transition* t : c->protocol->transitions_from(c->state)) {
        available += "\n  " + t->performative + " " + render_term(apply(c->bindings, t->content)) + " -> " +
                     t->to_state;
        BindingSet scratch;
        if (t->performative == performative && match_capture(apply(c->bindings, t->content), content, scratch))
            compatible.push_back(t);
    }
    if (compatible.empty())
        throw ConversationError("no transition from " + c->state + " accepts " + performative + " " +
                                render_term(content) + "; available:" + (available.empty() ? " none" : available));
    if (compatible.size() > 1)
        throw ConversationError(std::to_string(compatible.size()) + " transitions from " + c->state + " accept " +
                                performative + " " + render_term(content));

    const Transition& t = *compatible.front();
    auto resolve_agent = [&](const Term& pattern) -> std::optional<std::string> {
        Term v = apply(c->bindings, pattern);
        if (!v.is_ground()) return std::nullopt;
        if (!v.is_constant())
            throw ConversationError("agent field resolves to non-constant " + render_term(v));
        return v.text();
    };
    auto other = [&](const std::string& agent) {
        return c->participants[0] == agent ? c->participants[1] : c->participants[0];
    };
    std::optional<std::string> sender = resolve_agent(t.sender);
    std::optional<std::string> receiver = resolve_agent(t.receiver);
    if (!sender && receiver) sender = other(*receiver);
    if (sender && !receiver) receiver = other(*sender);
    if (!sender && !receiver && options_.self &&
        (c->participants[0] == *options_.self || c->participants[1] == *options_.self)) {
        sender = *options_.self;
        receiver = other(*sender);
    }
    if (!sender || !receiver)
        throw ConversationError("cannot determine sender and receiver for " + t.label() + " in " + conversation_id);

    Message m = Message::make(*sender, *receiver, performative, content, c->id, c->protocol->id);
    auto events = ingest(m, Direction::Sent);
    return {std::move(m), std::move(events)};
}

std::vector<SnapshotRow> ConversationManager::snapshot() const {
    std::vector<SnapshotRow> rows;
    rows.reserve(conversations_.size());
    for (const auto& c : conversations_) {
        SnapshotRow row{c.id, c.protocol->id, c.participants, std::nullopt, c.state, c.status, c.bindings};
        if (options_.self) {
            if (c.participants[0] == *options_.self)
                row.counterpart = c.participants[1];
            else if (c.participants[1] == *options_.self)
                row.counterpart = c.participants[0];
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

std::size_t ConversationManager::purge_terminated() {
    auto before = conversations_.size();
    std::erase_if(conversations_, [](const Conversation& c) { return c.status != ConversationStatus::Active; });
    return before - conversations_.size();
}

}  // namespace acre
