#pragma once

#include <cstddef>
#include <iosfwd>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "acre/conversation.hpp"

namespace acre {

/// One JSON-lines trace record:
/// {"direction":"received","sender":"a","receiver":"b","performative":"inform",
///  "content":"ready","conversation-id":"c1","protocol":"ns/name/1.0"}
struct TraceRecord {
    Direction direction = Direction::Received;
    Message message;
    std::size_t line = 0;
};

class TraceError : public std::runtime_error {
public:
    TraceError(const std::string& what, std::size_t line)
        : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}
    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

TraceRecord parse_trace_record(std::string_view json_line, std::size_t line = 0);
/// Blank lines are skipped; line numbers are 1-based.
std::vector<TraceRecord> read_trace(std::istream& in);
std::string to_json_line(const TraceRecord& record);

struct ReplayOptions {
    /// Counter ids ("acre-1", ...) and a frozen clock at the epoch, so that
    /// identical inputs give identical output.
    bool fixed_ids = true;
    /// Only replay messages this agent sent or received, from its viewpoint.
    std::optional<std::string> agent;
    std::optional<std::size_t> history_cap;
};

struct ReplayStep {
    std::size_t index = 0;  // 1-based position among replayed records
    TraceRecord record;
    std::vector<EngineEvent> events;
};

struct ReplayResult {
    std::vector<ReplayStep> steps;
    std::vector<SnapshotRow> final_snapshot;
    /// No failed, unmatched or ambiguous event occurred.
    bool clean = true;
};

ReplayResult replay(const std::vector<std::shared_ptr<const Protocol>>& protocols,
                    const std::vector<TraceRecord>& trace, const ReplayOptions& options = {});

std::string event_json(const EngineEvent& e, std::size_t message_index);
std::string render_snapshot_table(const std::vector<SnapshotRow>& rows);

/// Left-aligned columns separated by two spaces, no trailing blanks.
std::string render_table(const std::vector<std::vector<std::string>>& rows);

}  // namespace acre
