#include "acre/trace.hpp"

#include <istream>
#include <random>
#include <set>
#include <sstream>

#include <json.hpp>

namespace acre {

using nlohmann::json;
using nlohmann::ordered_json;

TraceRecord parse_trace_record(std::string_view json_line, std::size_t line) {
    json j;
    try {
        j = json::parse(json_line);
    } catch (const json::parse_error& e) {
        throw TraceError(std::string("invalid JSON: ") + e.what(), line);
    }
    if (!j.is_object()) throw TraceError("record must be a JSON object", line);

    auto str_field = [&](const char* key, bool required) -> std::optional<std::string> {
        auto it = j.find(key);
        if (it == j.end() || it->is_null()) {
            if (required) throw TraceError(std::string("missing field '") + key + "'", line);
            return std::nullopt;
        }
        if (!it->is_string()) throw TraceError(std::string("field '") + key + "' must be a string", line);
        return it->get<std::string>();
    };
    static const std::set<std::string> known{"direction", "sender",          "receiver", "performative",
                                             "content",   "conversation-id", "protocol"};
    for (const auto& [k, v] : j.items())
        if (!known.contains(k)) throw TraceError("unknown field '" + k + "'", line);

    TraceRecord r;
    r.line = line;
    if (auto dir = str_field("direction", false)) {
        if (*dir == "sent")
            r.direction = Direction::Sent;
        else if (*dir == "received")
            r.direction = Direction::Received;
        else
            throw TraceError("direction must be 'sent' or 'received'", line);
    }
    Term content = Term::anonymous();
    try {
        content = parse_term(*str_field("content", true));
    } catch (const TermSyntaxError& e) {
        throw TraceError(std::string("content: ") + e.what(), line);
    }
    std::optional<ProtocolId> protocol;
    if (auto p = str_field("protocol", false)) {
        try {
            protocol = ProtocolId::parse(*p);
        } catch (const std::invalid_argument& e) {
            throw TraceError(e.what(), line);
        }
    }
    try {
        r.message = Message::make(*str_field("sender", true), *str_field("receiver", true),
                                  *str_field("performative", true), content, str_field("conversation-id", false),
                                  protocol);
    } catch (const std::invalid_argument& e) {
        throw TraceError(e.what(), line);
    }
    return r;
}

std::vector<TraceRecord> read_trace(std::istream& in) {
    std::vector<TraceRecord> out;
    std::string line;
    std::size_t n = 0;
    while (std::getline(in, line)) {
        ++n;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        out.push_back(parse_trace_record(line, n));
    }
    return out;
}

std::string to_json_line(const TraceRecord& r) {
    ordered_json j;
    j["direction"] = std::string(to_string(r.direction));
    j["sender"] = r.message.sender;
    j["receiver"] = r.message.receiver;
    j["performative"] = r.message.performative;
    j["content"] = render_term(r.message.content);
    if (r.message.conversation_id) j["conversation-id"] = *r.message.conversation_id;
    if (r.message.protocol) j["protocol"] = r.message.protocol->str();
    return j.dump();
}

ReplayResult replay(const std::vector<std::shared_ptr<const Protocol>>& protocols,
                    const std::vector<TraceRecord>& trace, const ReplayOptions& options) {
    ConversationManager::Options mo;
    mo.history_cap = options.history_cap;
    mo.self = options.agent;
    if (options.fixed_ids) {
        mo.clock = [] { return std::chrono::system_clock::time_point{}; };
    } else {
        std::random_device rd;
        std::ostringstream prefix;
        prefix << "acre-" << std::hex << rd() << "-";
        mo.next_id = [p = prefix.str(), n = std::size_t{0}]() mutable { return p + std::to_string(++n); };
    }
    ConversationManager manager(std::move(mo));
    for (const auto& p : protocols) manager.add_protocol(p);

    ReplayResult result;
    std::size_t index = 0;
    for (const auto& rec : trace) {
        const Message& m = rec.message;
        if (options.agent && m.sender != *options.agent && m.receiver != *options.agent) continue;
        ReplayStep step;
        step.index = ++index;
        step.record = rec;
        if (options.agent) step.record.direction = m.sender == *options.agent ? Direction::Sent : Direction::Received;
        step.events = manager.ingest(m, step.record.direction);
        for (const auto& e : step.events) {
            if (e.kind == EventKind::Failed || e.kind == EventKind::Unmatched || e.kind == EventKind::Ambiguous)
                result.clean = false;
        }
        result.steps.push_back(std::move(step));
    }
    result.final_snapshot = manager.snapshot();
    return result;
}

std::string event_json(const EngineEvent& e, std::size_t message_index) {
    ordered_json j;
    j["message"] = message_index;
    j["timestamp"] = iso8601(e.timestamp);
    j["kind"] = std::string(to_string(e.kind));
    j["conversation"] = e.conversation_id ? json(*e.conversation_id) : json(nullptr);
    j["protocol"] = e.protocol ? json(e.protocol->str()) : json(nullptr);
    j["detail"] = e.detail;
    return j.dump();
}

std::string render_table(const std::vector<std::vector<std::string>>& rows) {
    std::vector<std::size_t> width;
    for (const auto& row : rows) {
        if (width.size() < row.size()) width.resize(row.size(), 0);
        for (std::size_t i = 0; i < row.size(); ++i) width[i] = std::max(width[i], row[i].size());
    }
    std::string out;
    for (const auto& row : rows) {
        std::string line;
        for (std::size_t i = 0; i < row.size(); ++i) {
            line += row[i];
            if (i + 1 < row.size()) line.append(width[i] - row[i].size() + 2, ' ');
        }
        while (!line.empty() && line.back() == ' ') line.pop_back();
        out += line;
        out += '\n';
    }
    return out;
}

std::string render_snapshot_table(const std::vector<SnapshotRow>& rows) {
    std::vector<std::vector<std::string>> table{
        {"ID", "PROTOCOL", "PARTICIPANTS", "STATE", "STATUS", "BINDINGS"}};
    for (const auto& r : rows) {
        table.push_back({r.conversation_id, r.protocol.str(), r.participants[0] + "," + r.participants[1], r.state,
                         std::string(to_string(r.status)), render_bindings(r.bindings)});
    }
    return render_table(table);
}

}  // namespace acre
