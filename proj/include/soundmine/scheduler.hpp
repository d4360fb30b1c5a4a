#pragma once

#include <atomic>
#include <chrono>
#include <cstdint>
#include <cstdio>
#include <iostream>
#include <mutex>
#include <sstream>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "soundmine/archive.hpp"
#include "soundmine/audio_io.hpp"
#include "soundmine/detector.hpp"
#include "soundmine/errors.hpp"

namespace soundmine {

struct Block {
    int block_id = 0;  // dense from 0, in start order
    int stream_id = 0;
    std::int64_t start_sample = 0;
    std::int64_t length = 0;
};

struct BlockPlan {
    std::vector<Block> blocks;
    std::int64_t block_len = 0;
    std::int64_t overlap = 0;
    int stream_id = 0;
};

enum class BlockStatus { OK, INTEGRITY_FAIL, DETECTOR_ERROR, IO_ERROR };

inline const char* block_status_name(BlockStatus s) {
    switch (s) {
        case BlockStatus::OK: return "OK";
        case BlockStatus::INTEGRITY_FAIL: return "INTEGRITY_FAIL";
        case BlockStatus::DETECTOR_ERROR: return "DETECTOR_ERROR";
        default: return "IO_ERROR";
    }
}

struct BlockOutcome {
    int block_id = 0;
    BlockStatus status = BlockStatus::OK;
    std::vector<RawDetection> detections;  // empty unless status == OK
    double elapsed_s = 0;
    std::string message;
};

// Aggregate results of one execution; the run layer adds audio totals and
// the merged event count before the report is written out.
struct RunReport {
    double ert_seconds = 0;
    double audio_seconds = 0;
    int workers = 1;
    std::int64_t total_events = 0;
    double rate_xrt = 0;
    std::int64_t blocks_ok = 0;
    std::int64_t blocks_integrity_fail = 0;
    std::int64_t blocks_detector_error = 0;
    std::int64_t blocks_io_error = 0;
    std::vector<std::int64_t> failed_block_ids;
};

// Fixed-stride partition of a stream into overlapping blocks: starts at every
// multiple of (block_len - overlap) below the stream length, lengths clamped
// to the stream end. Streams shorter than block_len yield one clamped block.
inline BlockPlan plan_blocks(const ChannelStream& stream, std::int64_t block_len,
                             std::int64_t overlap) {
    if (block_len <= 0) throw BadGeometryError("block_len must be > 0");
    if (overlap < 0 || overlap >= block_len)
        throw BadGeometryError("overlap must satisfy 0 <= overlap < block_len");
    BlockPlan plan;
    plan.block_len = block_len;
    plan.overlap = overlap;
    plan.stream_id = stream.stream_id;
    const std::int64_t total = stream.total_virtual_samples;
    const std::int64_t stride = block_len - overlap;
    int id = 0;
    for (std::int64_t start = 0; start < total; start += stride) {
        Block b;
        b.block_id = id++;
        b.stream_id = stream.stream_id;
        b.start_sample = start;
        b.length = std::min(block_len, total - start);
        plan.blocks.push_back(b);
    }
    return plan;
}

// Pure aggregation of per-block outcomes into the report's counters.
// total_events here counts raw per-block detections; the run layer replaces
// it with the merged event count before writing the report.
inline void summarize(const std::vector<BlockOutcome>& outcomes, RunReport& report) {
    report.blocks_ok = 0;
    report.blocks_integrity_fail = 0;
    report.blocks_detector_error = 0;
    report.blocks_io_error = 0;
    report.total_events = 0;
    report.failed_block_ids.clear();
    for (const BlockOutcome& o : outcomes) {
        switch (o.status) {
            case BlockStatus::OK:
                ++report.blocks_ok;
                report.total_events += static_cast<std::int64_t>(o.detections.size());
                break;
            case BlockStatus::INTEGRITY_FAIL: ++report.blocks_integrity_fail; break;
            case BlockStatus::DETECTOR_ERROR: ++report.blocks_detector_error; break;
            case BlockStatus::IO_ERROR: ++report.blocks_io_error; break;
        }
        if (o.status != BlockStatus::OK) report.failed_block_ids.push_back(o.block_id);
    }
}

namespace detail {

inline BlockOutcome process_block(const Block& block, const ArchiveMap& map,
                                  Detector& detector, const DetectorDescriptor& desc,
                                  const IntegrityThresholds& thresholds,
                                  DecodeCache& cache) {
    BlockOutcome outcome;
    outcome.block_id = block.block_id;
    const auto t0 = std::chrono::steady_clock::now();
    try {
        ReadResult read = read_block(map, block.stream_id, block.start_sample,
                                     block.length, &cache);
        if (read.has_io_fault()) {
            outcome.status = BlockStatus::IO_ERROR;
            outcome.message = read.faults.front().message;
        } else {
            IntegrityReport integrity = check_integrity(read.block, thresholds);
            if (integrity.verdict == IntegrityVerdict::FAIL) {
                std::ostringstream os;
                os << "integrity: valid_fraction=" << integrity.valid_fraction
                   << " nonfinite=" << integrity.nonfinite_count;
                outcome.status = BlockStatus::INTEGRITY_FAIL;
                outcome.message = os.str();
            } else {
                try {
                    outcome.detections = run_detector(detector, desc, read.block);
                    outcome.status = BlockStatus::OK;
                } catch (const std::exception& e) {
                    outcome.status = BlockStatus::DETECTOR_ERROR;
                    outcome.message = e.what();
                    outcome.detections.clear();
                } catch (...) {
                    outcome.status = BlockStatus::DETECTOR_ERROR;
                    outcome.message = "unknown detector failure";
                    outcome.detections.clear();
                }
            }
        }
    } catch (const std::exception& e) {
        outcome.status = BlockStatus::IO_ERROR;
        outcome.message = e.what();
        outcome.detections.clear();
    }
    outcome.elapsed_s =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return outcome;
}

}  // namespace detail

// Runs every block of the plan across `workers` lanes. Each lane owns a
// private detector instance and decode cache; faults stay inside their
// block's outcome. Outcomes come back sorted by block_id no matter the
// completion order.
inline std::pair<std::vector<BlockOutcome>, RunReport> execute(
    const BlockPlan& plan, const DetectorHandle& detector, const ArchiveMap& map,
    int workers, const IntegrityThresholds& thresholds = {},
    std::ostream* progress = &std::cerr) {
    if (workers < 1) throw std::invalid_argument("workers must be >= 1");

    std::vector<BlockOutcome> outcomes(plan.blocks.size());
    const auto t0 = std::chrono::steady_clock::now();

    std::atomic<std::size_t> next{0};
    std::mutex progress_mutex;
    const std::size_t total = plan.blocks.size();

    auto lane = [&]() {
        std::unique_ptr<Detector> instance = detector.make();
        DecodeCache cache;
        while (true) {
            std::size_t i = next.fetch_add(1);
            if (i >= total) break;
            outcomes[i] = detail::process_block(plan.blocks[i], map, *instance,
                                                detector.descriptor(), thresholds, cache);
            if (progress) {
                std::lock_guard<std::mutex> lock(progress_mutex);
                char line[160];
                std::snprintf(line, sizeof line, "PROGRESS %d/%zu %s %zu %.3f\n",
                              outcomes[i].block_id, total,
                              block_status_name(outcomes[i].status),
                              outcomes[i].detections.size(), outcomes[i].elapsed_s);
                (*progress) << line << std::flush;
            }
        }
    };

    const int lanes = std::min<std::size_t>(static_cast<std::size_t>(workers),
                                            std::max<std::size_t>(total, 1));
    std::vector<std::thread> pool;
    for (int i = 1; i < lanes; ++i) pool.emplace_back(lane);
    lane();
    for (auto& t : pool) t.join();

    RunReport report;
    report.workers = workers;
    report.ert_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    summarize(outcomes, report);
    return {std::move(outcomes), std::move(report)};
}

}  // namespace soundmine
