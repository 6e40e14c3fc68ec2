#pragma once

#include <cstdint>
#include <ostream>
#include <string>
#include <vector>

namespace qrsim::engine {

enum class EventKind {
    LinkAttempt,
    BSAOutcome,
    ClassicalMessage,
    SwapDecision,
    PurifyRound,
    CertSample,
    AppMeasure,
    AttackAction,
    NodeFailure,
    ConnectionState,
    MonitorVerdict,
    Timeout,
};

std::string to_string(EventKind k);

struct LogRow {
    double time_s = 0.0;
    std::uint64_t seq = 0;
    EventKind kind = EventKind::LinkAttempt;
    std::string node;
    std::string connection;
    std::string detail;
    // Structured attribution, also rendered into `detail`.
    std::string attack;                 // AttackAction rows: attack id
    std::string verdict;                // MonitorVerdict rows
    std::vector<std::string> attacks;   // MonitorVerdict rows: attacks that touched the subject
};

/// Append-only record of a run. CSV columns: time_s,seq,kind,node,connection,detail
class EventLog {
public:
    explicit EventLog(bool keep_rows = true) : keep_(keep_rows) {}

    void add(LogRow row);
    const std::vector<LogRow>& rows() const { return rows_; }
    std::size_t count() const { return count_; }
    bool keeping() const { return keep_; }

    void write_csv(std::ostream& out) const;
    std::string csv() const;

    static constexpr const char* kHeader = "time_s,seq,kind,node,connection,detail";

private:
    bool keep_;
    std::size_t count_ = 0;
    std::vector<LogRow> rows_;
};

}  // namespace qrsim::engine
