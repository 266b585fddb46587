#pragma once

#include <chrono>
#include <optional>
#include <string>
#include <string_view>

#include "acre/protocol.hpp"

namespace acre {

enum class EventKind {
    ConversationBegun,
    Advanced,
    Completed,
    Failed,
    Unmatched,
    Ambiguous,
    ProtocolLoaded,
};

std::string_view to_string(EventKind kind) noexcept;

struct EngineEvent {
    EventKind kind;
    std::optional<std::string> conversation_id;
    std::optional<ProtocolId> protocol;
    std::string detail;
    std::chrono::system_clock::time_point timestamp{};

    friend bool operator==(const EngineEvent&, const EngineEvent&) = default;
};

/// UTC, second precision: 2010-05-14T09:30:00Z
std::string iso8601(std::chrono::system_clock::time_point tp);

/// "<timestamp> <kind> <conversation|-> <protocol|-> <detail>"
std::string format_event_line(const EngineEvent& e);

}  // namespace acre
