#include "qrsim/engine/event_log.hpp"

#include <fmt/format.h>

#include <sstream>

namespace qrsim::engine {

std::string to_string(EventKind k) {
    switch (k) {
        case EventKind::LinkAttempt: return "LinkAttempt";
        case EventKind::BSAOutcome: return "BSAOutcome";
        case EventKind::ClassicalMessage: return "ClassicalMessage";
        case EventKind::SwapDecision: return "SwapDecision";
        case EventKind::PurifyRound: return "PurifyRound";
        case EventKind::CertSample: return "CertSample";
        case EventKind::AppMeasure: return "AppMeasure";
        case EventKind::AttackAction: return "AttackAction";
        case EventKind::NodeFailure: return "NodeFailure";
        case EventKind::ConnectionState: return "ConnectionState";
        case EventKind::MonitorVerdict: return "MonitorVerdict";
        case EventKind::Timeout: return "Timeout";
    }
    return "?";
}

void EventLog::add(LogRow row) {
    ++count_;
    if (keep_) rows_.push_back(std::move(row));
}

namespace {

std::string quoted(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

}  // namespace

void EventLog::write_csv(std::ostream& out) const {
    out << kHeader << '\n';
    for (const auto& r : rows_) {
        std::string detail = r.detail;
        auto append = [&](const std::string& kv) { detail += detail.empty() ? kv : " " + kv; };
        if (!r.attack.empty()) append("attack=" + r.attack);
        if (!r.verdict.empty()) append("verdict=" + r.verdict);
        if (!r.attacks.empty()) {
            std::string joined;
            for (const auto& a : r.attacks) joined += (joined.empty() ? "" : "|") + a;
            append("attributed=" + joined);
        }
        out << fmt::format("{:.9f},{},{},{},{},{}\n", r.time_s, r.seq, to_string(r.kind), quoted(r.node),
                           quoted(r.connection), quoted(detail));
    }
}

std::string EventLog::csv() const {
    std::ostringstream os;
    write_csv(os);
    return os.str();
}

}  // namespace qrsim::engine
