#include <gtest/gtest.h>

#include <set>

#include "acre/conversation.hpp"
#include "support/fixtures.hpp"
#include "support/random_trace.hpp"

namespace acre {
namespace {

using testing::load_resolved;

Term C(const char* s) { return Term::constant(s); }
Term F(const char* f, std::vector<Term> args) { return Term::function(f, std::move(args)); }

const ProtocolId kVickrey{"is.lill.acre", "acre-vickreyauction", "0.1"};
const ProtocolId kProcess{"is.lill.acre", "acre-processdocuments", "0.1"};

std::vector<EventKind> kinds(const std::vector<EngineEvent>& events) {
    std::vector<EventKind> out;
    for (const auto& e : events) out.push_back(e.kind);
    return out;
}

BindingSet bindings(std::initializer_list<std::pair<const char*, const char*>> kv) {
    BindingSet b;
    for (const auto& [k, v] : kv) b.bind(k, C(v));
    return b;
}

class ProcessDocuments : public ::testing::Test {
protected:
    void SetUp() override { mgr.add_protocol(load_resolved("process_documents.xml")); }

    std::vector<EngineEvent> send(const char* s, const char* r, const char* perf, Term content,
                                  std::optional<std::string> id = std::nullopt) {
        return mgr.ingest(Message::make(s, r, perf, std::move(content), std::move(id)), Direction::Received);
    }
    // Drives a fresh conversation to Requested with docid=doc123.
    void to_requested() {
        send("processor", "manager", "inform", C("ready"));
        send("manager", "processor", "request", F("process", {C("doc123")}));
    }

    ConversationManager mgr;
};

TEST_F(ProcessDocuments, ReadyOpensConversationInWaiting) {
    auto events = send("processor", "manager", "inform", C("ready"));
    EXPECT_EQ(kinds(events), (std::vector{EventKind::ConversationBegun, EventKind::Advanced}));
    const Conversation* c = mgr.find("acre-1");
    ASSERT_NE(c, nullptr);
    EXPECT_EQ(c->state, "Waiting");
    EXPECT_EQ(c->bindings, bindings({{"initiator", "processor"}, {"respondent", "manager"}}));
    EXPECT_EQ(c->participants, (std::array<std::string, 2>{"processor", "manager"}));
    EXPECT_EQ(events[1].detail, "Start -> Waiting on inform ready");
}

TEST_F(ProcessDocuments, RequestMovesToRequestedAndBindsDocid) {
    send("processor", "manager", "inform", C("ready"));
    auto events = send("manager", "processor", "request", F("process", {C("doc123")}));
    EXPECT_EQ(kinds(events), std::vector{EventKind::Advanced});
    const Conversation* c = mgr.find("acre-1");
    EXPECT_EQ(c->state, "Requested");
    EXPECT_EQ(*c->bindings.find("docid"), C("doc123"));
}

TEST_F(ProcessDocuments, DoneReturnsToWaitingAndMutableDocidIsOverwritten) {
    to_requested();
    EXPECT_EQ(kinds(send("processor", "manager", "inform", F("done", {C("doc123")}))), std::vector{EventKind::Advanced});
    EXPECT_EQ(mgr.find("acre-1")->state, "Waiting");
    EXPECT_EQ(kinds(send("manager", "processor", "request", F("process", {C("doc124")}))),
              std::vector{EventKind::Advanced});
    EXPECT_EQ(mgr.find("acre-1")->state, "Requested");
    EXPECT_EQ(*mgr.find("acre-1")->bindings.find("docid"), C("doc124"));
}

TEST_F(ProcessDocuments, RefusingAnotherDocumentFailsTheConversation) {
    to_requested();
    auto events = send("processor", "manager", "refuse", F("refuse", {C("doc124")}), "acre-1");
    ASSERT_EQ(kinds(events), (std::vector{EventKind::Failed, EventKind::Unmatched}));
    EXPECT_EQ(events[0].conversation_id, "acre-1");
    EXPECT_NE(events[0].detail.find("no transition from Requested matches"), std::string::npos);
    EXPECT_EQ(mgr.find("acre-1")->status, ConversationStatus::Failed);
    EXPECT_EQ(mgr.find("acre-1")->state, "Requested");
}

TEST_F(ProcessDocuments, RefusingTheBoundDocumentCompletes) {
    to_requested();
    auto events = send("processor", "manager", "refuse", F("refuse", {C("doc123")}), "acre-1");
    EXPECT_EQ(kinds(events), std::vector{EventKind::Completed});
    EXPECT_EQ(mgr.find("acre-1")->state, "End");
    EXPECT_EQ(mgr.find("acre-1")->status, ConversationStatus::Completed);
}

TEST_F(ProcessDocuments, IdLessRefuseOfOtherDocumentIsOnlyUnmatched) {
    to_requested();
    auto events = send("processor", "manager", "refuse", F("refuse", {C("doc124")}));
    EXPECT_EQ(kinds(events), std::vector{EventKind::Unmatched});
    EXPECT_EQ(mgr.find("acre-1")->status, ConversationStatus::Active);
}

TEST_F(ProcessDocuments, MatchingNothingIsUnmatched) {
    auto events = send("x", "y", "cfp", F("bidfor", {C("lot1")}));
    ASSERT_EQ(kinds(events), std::vector{EventKind::Unmatched});
    EXPECT_EQ(events[0].detail, "(cfp :sender x :receiver y :content bidfor(lot1))");
    EXPECT_EQ(mgr.size(), 0u);
}

TEST_F(ProcessDocuments, CompletedConversationIsNotACandidate) {
    to_requested();
    send("processor", "manager", "refuse", F("refuse", {C("doc123")}), "acre-1");
    Message again = Message::make("processor", "manager", "inform", F("done", {C("doc123")}), "acre-1");
    EXPECT_TRUE(mgr.candidate_conversations(again).candidates.empty());
    EXPECT_TRUE(mgr.candidate_conversations(again).failed.empty());
    auto events = mgr.ingest(again, Direction::Received);
    ASSERT_EQ(kinds(events), std::vector{EventKind::Unmatched});
    EXPECT_NE(events[0].detail.find("conversation id acre-1 is already in use"), std::string::npos);
}

TEST_F(ProcessDocuments, TwoIdLessConversationsInWaitingAreAmbiguous) {
    send("processor", "manager", "inform", C("ready"));
    send("processor", "manager", "inform", C("ready"));
    ASSERT_EQ(mgr.size(), 2u);

    Message m = Message::make("manager", "processor", "request", F("process", {C("doc9")}));
    auto scan = mgr.candidate_conversations(m);
    ASSERT_EQ(scan.candidates.size(), 2u);
    EXPECT_EQ(scan.candidates[0].conversation_id, "acre-1");
    EXPECT_EQ(scan.candidates[1].conversation_id, "acre-2");

    auto before = mgr.snapshot();
    auto events = mgr.ingest(m, Direction::Received);
    EXPECT_EQ(kinds(events), std::vector{EventKind::Ambiguous});
    EXPECT_EQ(mgr.snapshot(), before);
}

TEST_F(ProcessDocuments, ConversationIdDisambiguates) {
    send("processor", "manager", "inform", C("ready"));
    send("processor", "manager", "inform", C("ready"));
    auto events = send("manager", "processor", "request", F("process", {C("doc9")}), "acre-2");
    EXPECT_EQ(kinds(events), std::vector{EventKind::Advanced});
    EXPECT_EQ(mgr.find("acre-1")->state, "Waiting");
    EXPECT_EQ(mgr.find("acre-2")->state, "Requested");
}

TEST_F(ProcessDocuments, ExplicitIdIsUsedForNewConversations) {
    auto events = send("processor", "manager", "inform", C("ready"), "job-7");
    EXPECT_EQ(events[0].conversation_id, "job-7");
    EXPECT_NE(mgr.find("job-7"), nullptr);
    // A second opener with the same id belongs to job-7's protocol but not its
    // state, so job-7 fails and no duplicate is created.
    auto again = send("processor", "manager", "inform", C("ready"), "job-7");
    EXPECT_EQ(kinds(again), (std::vector{EventKind::Failed, EventKind::Unmatched}));
    EXPECT_EQ(mgr.size(), 1u);
}

TEST_F(ProcessDocuments, ProtocolFieldMismatchFailsNamedConversation) {
    send("processor", "manager", "inform", C("ready"));
    Message m = Message::make("manager", "processor", "request", F("process", {C("doc1")}), "acre-1", kVickrey);
    auto events = mgr.ingest(m, Direction::Received);
    ASSERT_GE(events.size(), 1u);
    EXPECT_EQ(events[0].kind, EventKind::Failed);
    EXPECT_NE(events[0].detail.find("message names protocol"), std::string::npos);
}

TEST(NewConversations, CfpWithVickreyIdStartsAuction) {
    ConversationManager mgr;
    mgr.add_protocol(load_resolved("vickrey.xml"));
    mgr.add_protocol(load_resolved("process_documents.xml"));
    Message m = Message::make("auctioneer", "bidder1", "cfp", F("bidfor", {C("lot1")}), std::nullopt, kVickrey);
    auto scan = mgr.candidate_new_conversations(m);
    ASSERT_EQ(scan.candidates.size(), 1u);
    EXPECT_EQ(scan.candidates[0].protocol->id, kVickrey);
    EXPECT_EQ(scan.candidates[0].transition->from_state, "start");
}

TEST(NewConversations, UnknownProtocolGivesNoCandidate) {
    ConversationManager mgr;
    mgr.add_protocol(load_resolved("vickrey.xml"));
    Message m = Message::make("a", "b", "cfp", F("bidfor", {C("lot1")}), std::nullopt, ProtocolId{"x", "y", "1"});
    auto scan = mgr.candidate_new_conversations(m);
    EXPECT_TRUE(scan.candidates.empty());
    EXPECT_EQ(scan.diagnostic, "unknown protocol x/y/1");
    EXPECT_EQ(kinds(mgr.ingest(m, Direction::Received)), std::vector{EventKind::Unmatched});
}

TEST(NewConversations, ReadyOnlyOpensProcessDocuments) {
    ConversationManager mgr;
    auto vickrey = load_resolved("vickrey.xml");
    auto process = load_resolved("process_documents.xml");
    mgr.add_protocol(vickrey);
    mgr.add_protocol(process);
    Message m = Message::make("processor", "manager", "inform", C("ready"));

    // Scan every protocol's initial transitions by hand.
    std::vector<ProtocolId> expected;
    for (const auto& p : {vickrey, process}) {
        for (const auto& t : p->transitions)
            if (t.from_state == p->initial_state() && t.performative == m.performative &&
                oracle::matches(t.content, m.content))
                expected.push_back(p->id);
    }
    auto scan = mgr.candidate_new_conversations(m);
    ASSERT_EQ(scan.candidates.size(), expected.size());
    ASSERT_EQ(expected, std::vector{kProcess});
    EXPECT_EQ(scan.candidates[0].protocol->id, kProcess);
}

TEST(NewConversations, TwoProtocolsWithSameOpenerAreAmbiguous) {
    ConversationManager mgr;
    mgr.add_protocol(load_resolved("process_documents.xml"));
    mgr.add_protocol(load_resolved("process_documents_cancel.xml"));
    auto events = mgr.ingest(Message::make("p", "m", "inform", C("ready")), Direction::Received);
    EXPECT_EQ(kinds(events), std::vector{EventKind::Ambiguous});
    EXPECT_EQ(mgr.size(), 0u);
    // No id was spent on the ambiguous opener.
    EXPECT_EQ(mgr.next_id(), "acre-1");
}

TEST(NextId, CounterAndInjection) {
    ConversationManager mgr;
    EXPECT_EQ(mgr.next_id(), "acre-1");
    std::set<std::string> seen;
    for (int i = 0; i < 1000; ++i) seen.insert(mgr.next_id());
    EXPECT_EQ(seen.size(), 1000u);

    int n = 100;
    ConversationManager custom({.next_id = [&] { return "c" + std::to_string(n++); }});
    custom.add_protocol(load_resolved("process_documents.xml"));
    auto events = custom.ingest(Message::make("p", "m", "inform", C("ready")), Direction::Received);
    EXPECT_EQ(events[0].conversation_id, "c100");
}

TEST(NextId, SkipsIdsClaimedByMessages) {
    ConversationManager mgr;
    mgr.add_protocol(load_resolved("process_documents.xml"));
    mgr.ingest(Message::make("p", "m", "inform", C("ready"), "acre-1"), Direction::Received);
    auto events = mgr.ingest(Message::make("p", "m", "inform", C("ready")), Direction::Received);
    EXPECT_EQ(events[0].conversation_id, "acre-2");
    EXPECT_EQ(mgr.size(), 2u);
}

TEST(Vickrey, FullAuctionCompletes) {
    ConversationManager mgr;
    mgr.add_protocol(load_resolved("vickrey.xml"));
    auto e1 = mgr.ingest(Message::make("auctioneer", "bidder1", "cfp", F("bidfor", {C("lot1")}), std::nullopt, kVickrey),
                         Direction::Sent);
    auto e2 = mgr.ingest(Message::make("bidder1", "auctioneer", "propose", F("bid", {C("lot1"), C("40")}), "acre-1"),
                         Direction::Received);
    auto e3 = mgr.ingest(
        Message::make("auctioneer", "bidder1", "Accept-Proposal", F("bid", {C("lot1"), C("40")}), "acre-1"),
        Direction::Sent);
    EXPECT_EQ(kinds(e1), (std::vector{EventKind::ConversationBegun, EventKind::Advanced}));
    EXPECT_EQ(kinds(e2), std::vector{EventKind::Advanced});
    EXPECT_EQ(kinds(e3), std::vector{EventKind::Completed});
    const Conversation* c = mgr.find("acre-1");
    EXPECT_EQ(c->state, "accepted");
    EXPECT_EQ(c->bindings, bindings({{"amount", "40"}, {"bidder", "bidder1"}, {"initiator", "auctioneer"}, {"item", "lot1"}}));
    ASSERT_EQ(c->history.size(), 3u);
    EXPECT_EQ(c->history[0].direction, Direction::Sent);
    EXPECT_EQ(c->history[1].direction, Direction::Received);
}

TEST(Vickrey, WrongBidderCannotAdvance) {
    ConversationManager mgr;
    mgr.add_protocol(load_resolved("vickrey.xml"));
    mgr.ingest(Message::make("auctioneer", "bidder1", "cfp", F("bidfor", {C("lot1")})), Direction::Sent);
    auto events = mgr.ingest(Message::make("bidder2", "auctioneer", "propose", F("bid", {C("lot1"), C("40")})),
                             Direction::Received);
    EXPECT_EQ(kinds(events), std::vector{EventKind::Unmatched});
    EXPECT_EQ(mgr.find("acre-1")->state, "awaiting_bid");
}

TEST(MatchTransition, JointOverSenderReceiverContent) {
    auto p = load_resolved("vickrey.xml");
    const Transition& propose = p->transitions[1];
    BindingSet bound = bindings({{"initiator", "auct"}, {"bidder", "b1"}, {"item", "lot1"}});
    auto ok = match_transition(propose, bound, Message::make("b1", "auct", "propose", F("bid", {C("lot1"), C("55")})));
    ASSERT_TRUE(ok);
    EXPECT_EQ(*ok->find("amount"), C("55"));
    EXPECT_FALSE(match_transition(propose, bound, Message::make("b1", "auct", "propose", F("bid", {C("lot2"), C("55")}))));
    EXPECT_FALSE(match_transition(propose, bound, Message::make("b1", "auct", "cfp", F("bid", {C("lot1"), C("55")}))));
    EXPECT_FALSE(match_transition(propose, bound, Message::make("auct", "b1", "propose", F("bid", {C("lot1"), C("55")}))));

    // Repeated variable across fields: sender and receiver must agree.
    Transition same{"s", "t", Term::variable("x"), Term::variable("x"), "inform", Term::anonymous()};
    EXPECT_TRUE(match_transition(same, {}, Message::make("a", "a", "inform", C("z"))));
    EXPECT_FALSE(match_transition(same, {}, Message::make("a", "b", "inform", C("z"))));
}

TEST(MessageValidation, RejectsNonGroundAndEmptyAgents) {
    EXPECT_THROW(Message::make("a", "b", "inform", Term::variable("x")), NonGroundValue);
    EXPECT_THROW(Message::make("", "b", "inform", C("x")), std::invalid_argument);
    EXPECT_THROW(Message::make("a", "b", "", C("x")), std::invalid_argument);
    EXPECT_EQ(Message::make("a", "b", "INFORM", C("x")).performative, "inform");
}

class Advance : public ProcessDocuments {
protected:
    void SetUp() override {
        ProcessDocuments::SetUp();
        send("processor", "manager", "inform", C("ready"));
    }
};

TEST_F(Advance, SynthesizesFullMessage) {
    auto r = mgr.advance_conversation("acre-1", "request", F("process", {C("doc125")}));
    EXPECT_EQ(r.message.sender, "manager");
    EXPECT_EQ(r.message.receiver, "processor");
    EXPECT_EQ(r.message.conversation_id, "acre-1");
    EXPECT_EQ(r.message.protocol, kProcess);
    EXPECT_EQ(r.message.str(),
              "(request :sender manager :receiver processor :content process(doc125) :conversation-id acre-1 "
              ":protocol is.lill.acre/acre-processdocuments/0.1)");
    EXPECT_EQ(kinds(r.events), std::vector{EventKind::Advanced});
    EXPECT_EQ(mgr.find("acre-1")->state, "Requested");
    EXPECT_EQ(mgr.find("acre-1")->history.back().direction, Direction::Sent);
}

TEST_F(Advance, Errors) {
    EXPECT_THROW(mgr.advance_conversation("nope", "request", F("process", {C("d")})), ConversationError);
    try {
        mgr.advance_conversation("acre-1", "refuse", F("refuse", {C("d")}));
        ADD_FAILURE() << "expected an error";
    } catch (const ConversationError& e) {
        std::string what = e.what();
        EXPECT_NE(what.find("no transition from Waiting accepts refuse refuse(d)"), std::string::npos);
        EXPECT_NE(what.find("request process(??docid) -> Requested"), std::string::npos) << what;
    }
    EXPECT_THROW(mgr.advance_conversation("acre-1", "request", F("process", {Term::variable("d")})), NonGroundValue);

    mgr.advance_conversation("acre-1", "request", F("process", {C("d1")}));
    mgr.advance_conversation("acre-1", "refuse", F("refuse", {C("d1")}));
    EXPECT_EQ(mgr.find("acre-1")->status, ConversationStatus::Completed);
    EXPECT_THROW(mgr.advance_conversation("acre-1", "inform", F("done", {C("d1")})), ConversationError);
}

TEST(AdvanceAmbiguity, TwoCompatibleTransitionsIsAnError) {
    ConversationManager mgr;
    mgr.add_protocol(load_resolved("vickrey.xml"));
    mgr.ingest(Message::make("auct", "b1", "cfp", F("bidfor", {C("lot1")})), Direction::Sent);
    mgr.ingest(Message::make("b1", "auct", "propose", F("bid", {C("lot1"), C("9")})), Direction::Received);
    // accept and reject share a content pattern but differ by performative.
    EXPECT_NO_THROW(mgr.advance_conversation("acre-1", "reject-proposal", F("bid", {C("lot1"), C("9")})));
    EXPECT_EQ(mgr.find("acre-1")->state, "rejected");
}

TEST(Snapshot, CreationOrderCounterpartAndRetention) {
    ConversationManager mgr({.self = std::string("manager")});
    mgr.add_protocol(load_resolved("process_documents.xml"));
    mgr.ingest(Message::make("processor", "manager", "inform", C("ready"), "z"), Direction::Received);
    mgr.ingest(Message::make("processor", "manager", "inform", C("ready"), "a"), Direction::Received);
    mgr.ingest(Message::make("manager", "processor", "cfp", C("x"), "a"), Direction::Sent);
    auto rows = mgr.snapshot();
    ASSERT_EQ(rows.size(), 2u);
    EXPECT_EQ(rows[0].conversation_id, "z");
    EXPECT_EQ(rows[1].conversation_id, "a");
    EXPECT_EQ(rows[1].status, ConversationStatus::Failed);
    EXPECT_EQ(rows[0].counterpart, "processor");

    EXPECT_EQ(mgr.purge_terminated(), 1u);
    EXPECT_EQ(mgr.size(), 1u);
    auto events = mgr.ingest(Message::make("processor", "manager", "inform", C("ready"), "a"), Direction::Received);
    EXPECT_EQ(kinds(events), std::vector{EventKind::Unmatched});
}

TEST(Snapshot, AdvanceUsesSelfWhenAgentsAreAnonymous) {
    auto p = std::make_shared<Protocol>();
    p->id = {"t", "anon", "1"};
    p->states = {{"s", p->id}, {"m", p->id}, {"e", p->id}};
    p->transitions = {{"s", "m", Term::anonymous(), Term::anonymous(), "inform", C("go")},
                      {"m", "e", Term::anonymous(), Term::anonymous(), "inform", C("stop")}};
    auto resolved = std::make_shared<const Protocol>(resolve(*p, [](const ProtocolId&) { return nullptr; }));

    ConversationManager mgr({.self = std::string("me")});
    mgr.add_protocol(resolved);
    mgr.ingest(Message::make("you", "me", "inform", C("go")), Direction::Received);
    auto r = mgr.advance_conversation("acre-1", "inform", C("stop"));
    EXPECT_EQ(r.message.sender, "me");
    EXPECT_EQ(r.message.receiver, "you");

    ConversationManager blind;
    blind.add_protocol(resolved);
    blind.ingest(Message::make("you", "me", "inform", C("go")), Direction::Received);
    EXPECT_THROW(blind.advance_conversation("acre-1", "inform", C("stop")), ConversationError);
}

TEST(History, CapDropsOldestEntries) {
    ConversationManager mgr({.history_cap = 2});
    mgr.add_protocol(load_resolved("process_documents.xml"));
    mgr.ingest(Message::make("p", "m", "inform", C("ready")), Direction::Received);
    for (const char* d : {"d1", "d2"}) {
        mgr.ingest(Message::make("m", "p", "request", F("process", {C(d)})), Direction::Received);
        mgr.ingest(Message::make("p", "m", "inform", F("done", {C(d)})), Direction::Received);
    }
    const auto& h = mgr.find("acre-1")->history;
    ASSERT_EQ(h.size(), 2u);
    EXPECT_EQ(h.back().message.content, F("done", {C("d2")}));
}

TEST(Listeners, ReceiveEveryEventInOrder) {
    ConversationManager mgr;
    mgr.add_protocol(load_resolved("process_documents.xml"));
    std::vector<EngineEvent> seen;
    mgr.subscribe([&](const EngineEvent& e) { seen.push_back(e); });
    auto events = mgr.ingest(Message::make("p", "m", "inform", C("ready")), Direction::Received);
    EXPECT_EQ(seen, events);
}

TEST(EventLine, Format) {
    EngineEvent e{EventKind::Advanced, "acre-1", kProcess, "Start -> Waiting on inform ready", {}};
    EXPECT_EQ(format_event_line(e),
              "1970-01-01T00:00:00Z advanced acre-1 is.lill.acre/acre-processdocuments/0.1 Start -> Waiting on inform ready");
    EngineEvent u{EventKind::Unmatched, std::nullopt, std::nullopt, "(x :sender a :receiver b :content c)", {}};
    EXPECT_EQ(format_event_line(u), "1970-01-01T00:00:00Z unmatched - - (x :sender a :receiver b :content c)");
}

// Invariants checked over random streams.
TEST(Invariants, SingleOutcomeLegalStatesStableBindingsAbsorption) {
    std::vector<std::shared_ptr<const Protocol>> ps{load_resolved("vickrey.xml"), load_resolved("process_documents.xml"),
                                                     load_resolved("process_documents_cancel.xml")};
    for (std::uint64_t seed = 1; seed <= 60; ++seed) {
        ConversationManager mgr;
        for (const auto& p : ps) mgr.add_protocol(p);
        std::vector<const Protocol*> raw;
        for (const auto& p : ps) raw.push_back(p.get());
        oracle::Tracker view(raw);
        gen::TraceGen g(seed, ps);

        for (int i = 0; i < 40; ++i) {
            Message m = g.next(view);
            view.step(m);
            auto before = mgr.snapshot();
            auto events = mgr.ingest(m, Direction::Received);

            std::size_t final_kinds = 0;
            for (const auto& e : events)
                final_kinds += e.kind == EventKind::Advanced || e.kind == EventKind::Completed ||
                               e.kind == EventKind::Unmatched || e.kind == EventKind::Ambiguous;
            ASSERT_EQ(final_kinds, 1u) << m.str();

            auto after = mgr.snapshot();
            if (events.back().kind == EventKind::Ambiguous) {
                std::size_t failed = 0;
                for (const auto& e : events) failed += e.kind == EventKind::Failed;
                if (failed == 0) {
                    EXPECT_EQ(after, before);
                }
            }
            for (const auto& row : after) {
                const Conversation* c = mgr.find(row.conversation_id);
                ASSERT_NE(c->protocol->find_state(row.state), nullptr);
                if (row.status == ConversationStatus::Completed) {
                    EXPECT_TRUE(c->protocol->is_terminal(row.state));
                }
            }
            for (const auto& old : before) {
                const SnapshotRow* now = nullptr;
                for (const auto& r : after)
                    if (r.conversation_id == old.conversation_id) now = &r;
                ASSERT_NE(now, nullptr);
                if (old.status != ConversationStatus::Active) {
                    EXPECT_EQ(*now, old);
                    continue;
                }
                // Immutable variables keep their value; only docid is mutable here.
                for (const auto& [name, value] : old.bindings) {
                    if (name == "docid") continue;
                    EXPECT_EQ(*now->bindings.find(name), value) << name;
                }
            }
        }
    }
}

TEST(OracleEquivalence, RandomTracesAgree) {
    std::vector<std::shared_ptr<const Protocol>> ps{load_resolved("vickrey.xml"), load_resolved("process_documents.xml"),
                                                     load_resolved("process_documents_cancel.xml")};
    for (std::uint64_t seed = 1; seed <= 200; ++seed) {
        std::string diff = gen::compare_with_oracle(ps, seed, 30);
        ASSERT_TRUE(diff.empty()) << diff;
    }
}

}  // namespace
}  // namespace acre
