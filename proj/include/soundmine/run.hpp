#pragma once

#include <cmath>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "soundmine/archive.hpp"
#include "soundmine/detector.hpp"
#include "soundmine/events.hpp"
#include "soundmine/scheduler.hpp"

namespace soundmine {

// Everything a run needs; loads from JSON, individual fields overridable by
// CLI flags (flags win).
struct RunConfig {
    std::string archive_index_path;
    std::string detector_id;
    std::string parm_file;
    std::string output_path;
    int workers = 0;  // 0 = AUTO (logical CPU count)
    double block_len_s = 600.0;
    std::optional<double> overlap_s;  // absent: 2 x detector max event duration
    IntegrityThresholds integrity;
};

inline RunConfig run_config_from_json(const nlohmann::json& j) {
    RunConfig cfg;
    cfg.archive_index_path = j.at("archive_index_path").get<std::string>();
    cfg.detector_id = j.at("detector_id").get<std::string>();
    cfg.parm_file = j.at("parm_file").get<std::string>();
    cfg.output_path = j.value("output_path", std::string());
    if (j.contains("workers")) {
        const auto& w = j.at("workers");
        if (w.is_string()) {
            if (w.get<std::string>() != "auto")
                throw std::invalid_argument("workers must be an integer or \"auto\"");
            cfg.workers = 0;
        } else {
            cfg.workers = w.get<int>();
            if (cfg.workers < 1) throw std::invalid_argument("workers must be >= 1");
        }
    }
    cfg.block_len_s = j.value("block_len_s", 600.0);
    if (j.contains("overlap_s")) cfg.overlap_s = j.at("overlap_s").get<double>();
    if (j.contains("integrity")) {
        const auto& i = j.at("integrity");
        cfg.integrity.min_valid_fraction =
            i.value("min_valid_fraction", cfg.integrity.min_valid_fraction);
        cfg.integrity.clip_fraction = i.value("clip_fraction", cfg.integrity.clip_fraction);
    }
    return cfg;
}

inline RunConfig load_run_config(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open run config: " + path);
    return run_config_from_json(nlohmann::json::parse(in));
}

inline int resolve_workers(int configured) {
    if (configured >= 1) return configured;
    unsigned hw = std::thread::hardware_concurrency();
    return hw > 0 ? static_cast<int>(hw) : 1;
}

// Times-real-time throughput. Zero audio is simply rate 0; zero wall clock
// with nonzero audio is an error.
inline double compute_rate(double audio_seconds, double ert_seconds) {
    if (audio_seconds == 0.0) return 0.0;
    if (ert_seconds <= 0.0) throw ZeroErtError("ERT must be > 0");
    return audio_seconds / ert_seconds;
}

inline nlohmann::ordered_json run_report_to_json(const RunReport& r) {
    nlohmann::ordered_json j;
    j["ert_seconds"] = r.ert_seconds;
    j["audio_seconds"] = r.audio_seconds;
    j["workers"] = r.workers;
    j["total_events"] = r.total_events;
    j["rate_xrt"] = r.rate_xrt;
    j["blocks"] = {{"ok", r.blocks_ok},
                   {"integrity_fail", r.blocks_integrity_fail},
                   {"detector_error", r.blocks_detector_error},
                   {"io_error", r.blocks_io_error}};
    j["failed_block_ids"] = r.failed_block_ids;
    return j;
}

inline RunReport run_report_from_json(const nlohmann::json& j) {
    RunReport r;
    r.ert_seconds = j.at("ert_seconds").get<double>();
    r.audio_seconds = j.at("audio_seconds").get<double>();
    r.workers = j.at("workers").get<int>();
    r.total_events = j.at("total_events").get<std::int64_t>();
    r.rate_xrt = j.at("rate_xrt").get<double>();
    r.blocks_ok = j.at("blocks").at("ok").get<std::int64_t>();
    r.blocks_integrity_fail = j.at("blocks").at("integrity_fail").get<std::int64_t>();
    r.blocks_detector_error = j.at("blocks").at("detector_error").get<std::int64_t>();
    r.blocks_io_error = j.at("blocks").at("io_error").get<std::int64_t>();
    for (const auto& id : j.at("failed_block_ids"))
        r.failed_block_ids.push_back(id.get<std::int64_t>());
    return r;
}

inline std::string report_path_for(const std::string& table_path) {
    return table_path + ".report.json";
}

constexpr double kDefaultIouThreshold = 0.5;

struct RunResult {
    int exit_code = 0;  // 0 ok, 3 validation, 4 all blocks failed
    std::vector<std::string> violations;
    std::vector<Event> events;
    RunReport report;
};

// Validates the parm-file against every stream rate in the index. Touches no
// audio. Returns all violations (empty means runnable).
inline std::vector<std::string> validate_config(const RunConfig& cfg,
                                                const DetectorRegistry& registry,
                                                const ArchiveMap& map) {
    std::vector<std::string> violations;
    if (!registry.contains(cfg.detector_id)) {
        violations.push_back("unknown detector '" + cfg.detector_id + "'");
        return violations;
    }
    const DetectorDescriptor& desc = registry.descriptor(cfg.detector_id);

    ParmSet parms;
    try {
        parms = parse_parm_file(cfg.parm_file);
    } catch (const std::exception& e) {
        violations.push_back(e.what());
        return violations;
    }

    std::vector<int> rates;
    for (const auto& s : map.streams)
        if (std::find(rates.begin(), rates.end(), s.sample_rate) == rates.end())
            rates.push_back(s.sample_rate);
    if (rates.empty()) {
        violations.push_back("archive index has no streams");
        return violations;
    }
    for (int rate : rates) {
        for (const std::string& v : validate_parms(parms, desc, rate))
            violations.push_back("rate " + std::to_string(rate) + " Hz: " + v);
    }

    double overlap_s = cfg.overlap_s.value_or(2.0 * desc.max_event_duration_s);
    if (overlap_s < 0) violations.push_back("overlap_s must be >= 0");
    if (cfg.block_len_s <= 0) violations.push_back("block_len_s must be > 0");
    if (overlap_s >= cfg.block_len_s)
        violations.push_back("overlap_s (" + std::to_string(overlap_s) +
                             ") must be smaller than block_len_s (" +
                             std::to_string(cfg.block_len_s) + ")");
    return violations;
}

// Full run: plan -> execute -> merge -> write table + report. The clock
// starts after the index is loaded and stops after the table is written.
inline RunResult run_pipeline(const RunConfig& cfg, const DetectorRegistry& registry,
                              std::ostream* progress = &std::cerr) {
    ArchiveMap map = load_archive_map(cfg.archive_index_path);

    const auto t0 = std::chrono::steady_clock::now();
    RunResult result;
    result.violations = validate_config(cfg, registry, map);
    if (!result.violations.empty()) {
        result.exit_code = 3;
        return result;
    }

    const DetectorDescriptor& desc = registry.descriptor(cfg.detector_id);
    ParmSet parms = parse_parm_file(cfg.parm_file);
    const int workers = resolve_workers(cfg.workers);
    const double overlap_s = cfg.overlap_s.value_or(2.0 * desc.max_event_duration_s);
    const double archive_t0 = map.base_time();

    RunReport total;
    total.workers = workers;
    std::int64_t block_id_offset = 0;
    std::int64_t total_blocks = 0, failed_blocks = 0;

    for (const ChannelStream& stream : map.streams) {
        if (stream.total_virtual_samples == 0) continue;

        ValidatedParms vp;
        validate_parms(parms, desc, stream.sample_rate, &vp);  // passed above
        DetectorHandle handle = make_detector_handle(registry, cfg.detector_id, vp);

        std::int64_t block_len =
            std::max<std::int64_t>(1, std::llround(cfg.block_len_s * stream.sample_rate));
        std::int64_t overlap = std::llround(overlap_s * stream.sample_rate);
        if (block_len > stream.total_virtual_samples)
            block_len = stream.total_virtual_samples;
        if (overlap >= block_len) overlap = block_len - 1;

        BlockPlan plan = plan_blocks(stream, block_len, overlap);
        auto [outcomes, report] = execute(plan, handle, map, workers, cfg.integrity, progress);

        std::vector<Event> events = merge_block_detections(
            outcomes, overlap, kDefaultIouThreshold, stream.sample_rate,
            stream.channel + 1, stream.base_time - archive_t0);
        result.events.insert(result.events.end(), events.begin(), events.end());

        total.blocks_ok += report.blocks_ok;
        total.blocks_integrity_fail += report.blocks_integrity_fail;
        total.blocks_detector_error += report.blocks_detector_error;
        total.blocks_io_error += report.blocks_io_error;
        for (std::int64_t id : report.failed_block_ids)
            total.failed_block_ids.push_back(block_id_offset + id);
        total_blocks += static_cast<std::int64_t>(outcomes.size());
        failed_blocks += static_cast<std::int64_t>(report.failed_block_ids.size());
        block_id_offset += static_cast<std::int64_t>(outcomes.size());

        total.audio_seconds += stream.duration_seconds();
    }

    renumber_events(result.events);
    if (!cfg.output_path.empty()) write_raven_table(result.events, cfg.output_path);

    total.ert_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    total.total_events = static_cast<std::int64_t>(result.events.size());
    total.rate_xrt = compute_rate(total.audio_seconds, total.ert_seconds);
    result.report = total;

    if (!cfg.output_path.empty()) {
        std::ofstream rep(report_path_for(cfg.output_path), std::ios::binary);
        if (!rep) throw IoError("cannot write run report");
        rep << run_report_to_json(total).dump(2) << "\n";
    }

    result.exit_code = (total_blocks > 0 && failed_blocks == total_blocks) ? 4 : 0;
    return result;
}

// ---------------------------------------------------------------------------
// CLI entry points (thin wrappers returning process exit codes)

inline int cmd_index(const std::string& root, const std::string& pattern,
                     const std::string& rule_text, const std::string& out_path,
                     std::ostream& err = std::cerr) {
    try {
        TimestampRule rule = TimestampRule::parse(rule_text);
        ArchiveMap map = scan_archive(root, pattern, rule);
        save_archive_map(map, out_path);
        std::int64_t spans = 0;
        for (const auto& s : map.streams) spans += static_cast<std::int64_t>(s.spans.size());
        err << "indexed " << map.file_count() << " files, " << map.streams.size()
            << " streams, " << spans << " spans; " << map.skipped.size() << " skipped\n";
        return 0;
    } catch (const EmptyArchiveError& e) {
        err << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    }
}

inline int cmd_validate(const RunConfig& cfg, const DetectorRegistry& registry,
                        std::ostream& out = std::cout, std::ostream& err = std::cerr) {
    try {
        ArchiveMap map = load_archive_map(cfg.archive_index_path);
        std::vector<std::string> violations = validate_config(cfg, registry, map);
        if (violations.empty()) {
            out << "parm-file OK for detector '" << cfg.detector_id << "'\n";
            return 0;
        }
        for (const std::string& v : violations) out << "violation: " << v << "\n";
        return 3;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    }
}

inline int cmd_run(const RunConfig& cfg, const DetectorRegistry& registry,
                   std::ostream& out = std::cout, std::ostream& err = std::cerr,
                   std::ostream* progress = &std::cerr) {
    try {
        RunResult r = run_pipeline(cfg, registry, progress);
        if (r.exit_code == 3) {
            for (const std::string& v : r.violations) out << "violation: " << v << "\n";
            return 3;
        }
        out << "events: " << r.report.total_events << "  ert_s: " << r.report.ert_seconds
            << "  rate_xrt: " << r.report.rate_xrt << "  blocks ok/fail: "
            << r.report.blocks_ok << "/" << r.report.failed_block_ids.size() << "\n";
        if (r.exit_code == 4) err << "error: all blocks failed\n";
        return r.exit_code;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    }
}

struct BenchRow {
    int workers = 0;
    double ert_seconds = 0;
    std::int64_t events = 0;
    double rate_xrt = 0;
};

// Runs the same configuration once per worker count. Event counts must agree
// across rows; a mismatch is a correctness regression and outranks speed.
inline int cmd_bench(const RunConfig& cfg, const std::vector<int>& worker_list,
                     const DetectorRegistry& registry, std::ostream& out = std::cout,
                     std::ostream& err = std::cerr, std::ostream* progress = &std::cerr,
                     std::vector<BenchRow>* rows_out = nullptr) {
    if (worker_list.empty()) {
        err << "error: bench needs at least one worker count\n";
        return 1;
    }
    std::vector<BenchRow> rows;
    try {
        for (int w : worker_list) {
            RunConfig one = cfg;
            one.workers = w;
            if (!cfg.output_path.empty())
                one.output_path = cfg.output_path + ".w" + std::to_string(w);
            RunResult r = run_pipeline(one, registry, progress);
            if (r.exit_code == 3) {
                for (const std::string& v : r.violations) out << "violation: " << v << "\n";
                return 3;
            }
            rows.push_back({w, r.report.ert_seconds, r.report.total_events,
                            r.report.rate_xrt});
        }
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    }

    out << "Number of Cores\tERT (s)\tNumber of Events\tRate (xRT)\n";
    char buf[96];
    for (const BenchRow& r : rows) {
        std::snprintf(buf, sizeof buf, "%d\t%.2f\t%lld\t%.2f\n", r.workers, r.ert_seconds,
                      static_cast<long long>(r.events), r.rate_xrt);
        out << buf;
    }
    if (rows_out) *rows_out = rows;

    for (const BenchRow& r : rows)
        if (r.events != rows.front().events) {
            err << "error: event count varies with worker count (" << rows.front().events
                << " vs " << r.events << ")\n";
            return 5;
        }
    return 0;
}

}  // namespace soundmine
