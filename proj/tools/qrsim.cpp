// qrsim command line: validate, run, diff and dump scenarios.

#include "qrsim/adversary/attacks.hpp"
#include "qrsim/engine/simulator.hpp"
#include "qrsim/error.hpp"
#include "qrsim/network/scenario.hpp"
#include "qrsim/report/report.hpp"

#include <CLI11.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <regex>

namespace fs = std::filesystem;
using namespace qrsim;
using net::Json;

namespace {

constexpr int kOk = 0;
constexpr int kInvalid = 2;
constexpr int kRuntime = 3;

struct SeedRange {
    std::uint64_t first = 0, last = 0;
};

SeedRange parse_seeds(const std::string& text) {
    static const std::regex re(R"((\d+)\.\.(\d+))");
    std::smatch m;
    if (!std::regex_match(text, m, re)) throw ConfigError("--seeds expects A..B");
    SeedRange r{std::stoull(m[1]), std::stoull(m[2])};
    if (r.last < r.first) throw ConfigError("--seeds range is empty");
    return r;
}

Json read_json(const fs::path& p) {
    std::ifstream in(p);
    if (!in) throw ConfigError("cannot read " + p.string());
    try {
        return Json::parse(in);
    } catch (const Json::parse_error& e) {
        throw ConfigError(p.string() + ": " + e.what());
    }
}

void write_file(const fs::path& p, const std::string& text) {
    std::ofstream out(p, std::ios::binary);
    if (!out) throw ConfigError("cannot write " + p.string());
    out << text;
}

net::Scenario load_checked(const fs::path& path) {
    auto s = net::load_scenario_file(path);
    adversary::build_scripts(s);
    return s;
}

int report_validation(const ValidationError& e) {
    for (const auto& v : e.violations()) std::cerr << "invalid: [" << v.rule << "] " << v.subject << ": " << v.message << "\n";
    return kInvalid;
}

template <class F>
int guarded(F&& body) {
    try {
        return body();
    } catch (const ValidationError& e) {
        return report_validation(e);
    } catch (const ConfigError& e) {
        std::cerr << "invalid: " << e.what() << "\n";
        return kInvalid;
    } catch (const Error& e) {
        std::cerr << "runtime contradiction: " << e.what() << "\n";
        return kRuntime;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kRuntime;
    }
}

struct RunArgs {
    std::string scenario;
    std::optional<std::uint64_t> seed;
    std::string seeds;
    std::string out = "out";
    std::string baseline;
    std::string cert_scope;
};

Json run_one(const net::Scenario& s, std::uint64_t seed, const RunArgs& a, const report::ReportContext& base,
             const fs::path& dir) {
    engine::RunOptions o;
    o.seed = seed;
    if (!a.cert_scope.empty()) o.cert_scope = a.cert_scope == "link" ? net::CertScope::Link : net::CertScope::EndToEnd;
    const auto t0 = std::chrono::steady_clock::now();
    auto r = engine::run(s, o);
    auto ctx = base;
    ctx.wall_clock_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    fs::create_directories(dir);
    write_file(dir / "events.csv", r.log.csv());
    Json j = report::to_json(r, ctx);
    write_file(dir / "report.json", j.dump(2) + "\n");
    spdlog::info("seed {}: {} events, delivered {}, conserved {}", seed, r.log.count(), r.ledger.delivered_pairs,
                 r.conserved());
    if (!r.conserved()) throw ProtocolError("pair accounting does not balance");
    return j;
}

int cmd_run(const RunArgs& a) {
    const auto s = load_checked(a.scenario);
    report::ReportContext ctx;
    ctx.scenario_fingerprint = report::fingerprint(s);
    ctx.cert_scope = a.cert_scope.empty() ? net::to_string(s.protocol.cert_scope) : a.cert_scope;
    if (!a.baseline.empty()) ctx.baseline = report::baseline_from(read_json(a.baseline));
    const fs::path out = a.out;
    if (a.seeds.empty()) {
        run_one(s, a.seed.value_or(s.seed), a, ctx, out);
        return kOk;
    }
    const auto range = parse_seeds(a.seeds);
    std::vector<Json> reports;
    for (auto seed = range.first; seed <= range.last; ++seed)
        reports.push_back(run_one(s, seed, a, ctx, out / ("seed-" + std::to_string(seed))));
    write_file(out / "aggregate.json", report::aggregate(reports).dump(2) + "\n");
    return kOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Discrete-event simulator for attacks on quantum repeater networks"};
    app.require_subcommand(1);
    std::string log_level = "warn";
    app.add_option("--log-level", log_level, "trace|debug|info|warn|error|off")->capture_default_str();

    RunArgs ra;
    auto* run = app.add_subcommand("run", "Run a scenario and write events.csv and report.json");
    run->add_option("--scenario", ra.scenario, "Scenario JSON")->required()->check(CLI::ExistingFile);
    auto* seed_opt = run->add_option("--seed", ra.seed, "Override the scenario seed");
    run->add_option("--seeds", ra.seeds, "Seed sweep A..B (one sub-directory per seed plus aggregate.json)")
        ->excludes(seed_opt);
    run->add_option("--out", ra.out, "Output directory")->capture_default_str();
    run->add_option("--baseline", ra.baseline, "Stored honest-run report.json to compare against")
        ->check(CLI::ExistingFile);
    run->add_option("--cert-scope", ra.cert_scope, "Certification sampling scope")
        ->check(CLI::IsMember({"link", "e2e"}));

    std::string validate_path;
    auto* validate = app.add_subcommand("validate", "Check a scenario without running it");
    validate->add_option("--scenario", validate_path, "Scenario JSON")->required()->check(CLI::ExistingFile);

    std::string diff_a, diff_b;
    bool force = false;
    auto* diff = app.add_subcommand("diff", "Delta between two reports (b - a)");
    diff->add_option("a", diff_a, "First report.json")->required()->check(CLI::ExistingFile);
    diff->add_option("b", diff_b, "Second report.json")->required()->check(CLI::ExistingFile);
    diff->add_flag("--force", force, "Compare reports of different scenarios");

    std::string dump_path;
    auto* dump = app.add_subcommand("dump", "Print the normalized scenario and its fingerprint");
    dump->add_option("--scenario", dump_path, "Scenario JSON")->required()->check(CLI::ExistingFile);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? kOk : kInvalid;
    }

    auto logger = spdlog::stderr_color_st("qrsim");
    spdlog::set_default_logger(logger);
    spdlog::set_level(spdlog::level::from_str(log_level));

    if (run->parsed()) return guarded([&] { return cmd_run(ra); });
    if (validate->parsed())
        return guarded([&] {
            load_checked(validate_path);
            std::cout << "valid\n";
            return kOk;
        });
    if (diff->parsed())
        return guarded([&] {
            std::cout << report::diff(read_json(diff_a), read_json(diff_b), force).dump(2) << "\n";
            return kOk;
        });
    if (dump->parsed())
        return guarded([&] {
            const auto s = load_checked(dump_path);
            Json j = {{"fingerprint", report::fingerprint(s)}, {"scenario", net::normalized(s)}};
            std::cout << j.dump(2) << "\n";
            return kOk;
        });
    return kInvalid;
}
