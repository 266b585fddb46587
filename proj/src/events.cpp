#include "acre/events.hpp"

#include <ctime>

namespace acre {

std::string_view to_string(EventKind kind) noexcept {
    switch (kind) {
        case EventKind::ConversationBegun: return "conversation_begun";
        case EventKind::Advanced: return "advanced";
        case EventKind::Completed: return "completed";
        case EventKind::Failed: return "failed";
        case EventKind::Unmatched: return "unmatched";
        case EventKind::Ambiguous: return "ambiguous";
        case EventKind::ProtocolLoaded: return "protocol_loaded";
    }
    return "unknown";
}

std::string iso8601(std::chrono::system_clock::time_point tp) {
    std::time_t t = std::chrono::system_clock::to_time_t(tp);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

std::string format_event_line(const EngineEvent& e) {
    std::string line = iso8601(e.timestamp);
    line += ' ';
    line += to_string(e.kind);
    line += ' ';
    line += e.conversation_id.value_or("-");
    line += ' ';
    line += e.protocol ? e.protocol->str() : "-";
    line += ' ';
    line += e.detail;
    return line;
}

}  // namespace acre
