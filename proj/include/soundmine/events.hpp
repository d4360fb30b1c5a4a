#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <string>
#include <vector>

#include "soundmine/errors.hpp"
#include "soundmine/scheduler.hpp"

namespace soundmine {

// A merged, exportable acoustic event.
struct Event {
    int selection_id = 0;  // 1-based, dense
    int channel = 1;       // 1-based
    double begin_time = 0;  // seconds on the archive virtual timeline
    double end_time = 0;
    double low_freq = 0;  // Hz
    double high_freq = 0;
    double score = 0;
    std::string detector_id;
};

namespace detail {

struct Interval {
    std::int64_t begin = 0;
    std::int64_t end = 0;
    double low = 0, high = 0, score = 0;
    std::string detector_id;
};

inline double interval_iou(std::int64_t a1, std::int64_t a2, std::int64_t b1,
                           std::int64_t b2) {
    std::int64_t inter = std::min(a2, b2) - std::max(a1, b1);
    if (inter <= 0) return 0.0;
    std::int64_t uni = std::max(a2, b2) - std::min(a1, b1);
    return static_cast<double>(inter) / static_cast<double>(uni);
}

struct UnionFind {
    std::vector<std::size_t> parent;
    explicit UnionFind(std::size_t n) : parent(n) {
        std::iota(parent.begin(), parent.end(), 0);
    }
    std::size_t find(std::size_t x) {
        while (parent[x] != x) {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        return x;
    }
    void unite(std::size_t a, std::size_t b) { parent[find(a)] = find(b); }
};

// One pairwise-IoU clustering pass. Only same-detector pairs with positive
// overlap are candidates.
inline std::vector<Interval> merge_pass(std::vector<Interval> items, double iou_threshold,
                                        bool& changed) {
    std::sort(items.begin(), items.end(), [](const Interval& a, const Interval& b) {
        if (a.begin != b.begin) return a.begin < b.begin;
        if (a.end != b.end) return a.end < b.end;
        return a.detector_id < b.detector_id;
    });
    UnionFind uf(items.size());
    for (std::size_t i = 0; i < items.size(); ++i) {
        for (std::size_t j = i + 1; j < items.size() && items[j].begin < items[i].end; ++j) {
            if (items[i].detector_id != items[j].detector_id) continue;
            if (interval_iou(items[i].begin, items[i].end, items[j].begin, items[j].end) >=
                iou_threshold)
                uf.unite(i, j);
        }
    }
    std::vector<Interval> merged;
    std::vector<std::size_t> roots(items.size());
    for (std::size_t i = 0; i < items.size(); ++i) roots[i] = uf.find(i);
    std::vector<bool> done(items.size(), false);
    for (std::size_t i = 0; i < items.size(); ++i) {
        if (done[roots[i]]) continue;
        done[roots[i]] = true;
        Interval acc = items[i];
        for (std::size_t j = i + 1; j < items.size(); ++j) {
            if (roots[j] != roots[i]) continue;
            acc.begin = std::min(acc.begin, items[j].begin);
            acc.end = std::max(acc.end, items[j].end);
            acc.low = std::min(acc.low, items[j].low);
            acc.high = std::max(acc.high, items[j].high);
            acc.score = std::max(acc.score, items[j].score);
        }
        merged.push_back(std::move(acc));
    }
    changed = merged.size() != items.size();
    return merged;
}

}  // namespace detail

// Collapses duplicate detections reported by overlapping blocks: same
// detector/channel intervals with time IoU >= iou_threshold merge into one
// event spanning their union, keeping the max score. Clustering is
// transitive and iterated to a fixpoint, which makes the merge idempotent.
inline std::vector<Event> merge_block_detections(const std::vector<BlockOutcome>& outcomes,
                                                 std::int64_t overlap,
                                                 double iou_threshold, int sample_rate,
                                                 int channel_1based,
                                                 double archive_offset_s = 0.0) {
    (void)overlap;  // geometry is implied by the detections themselves
    std::vector<detail::Interval> items;
    for (const BlockOutcome& o : outcomes) {
        if (o.status != BlockStatus::OK) continue;
        for (const RawDetection& d : o.detections)
            items.push_back({d.begin_sample, d.end_sample, d.low_freq, d.high_freq,
                             d.score, d.detector_id});
    }
    bool changed = true;
    while (changed) items = detail::merge_pass(std::move(items), iou_threshold, changed);

    std::vector<Event> events;
    for (const detail::Interval& it : items) {
        Event e;
        e.channel = channel_1based;
        e.begin_time = archive_offset_s + static_cast<double>(it.begin) / sample_rate;
        e.end_time = archive_offset_s + static_cast<double>(it.end) / sample_rate;
        e.low_freq = it.low;
        e.high_freq = it.high;
        e.score = it.score;
        e.detector_id = it.detector_id;
        events.push_back(std::move(e));
    }
    std::sort(events.begin(), events.end(), [](const Event& a, const Event& b) {
        if (a.channel != b.channel) return a.channel < b.channel;
        if (a.begin_time != b.begin_time) return a.begin_time < b.begin_time;
        return a.end_time < b.end_time;
    });
    for (std::size_t i = 0; i < events.size(); ++i)
        events[i].selection_id = static_cast<int>(i) + 1;
    return events;
}

// Sorts by (channel, begin_time) and assigns dense 1-based selection ids.
inline void renumber_events(std::vector<Event>& events) {
    std::sort(events.begin(), events.end(), [](const Event& a, const Event& b) {
        if (a.channel != b.channel) return a.channel < b.channel;
        if (a.begin_time != b.begin_time) return a.begin_time < b.begin_time;
        return a.end_time < b.end_time;
    });
    for (std::size_t i = 0; i < events.size(); ++i)
        events[i].selection_id = static_cast<int>(i) + 1;
}

inline constexpr const char* kRavenHeader =
    "Selection\tView\tChannel\tBegin Time (s)\tEnd Time (s)\tLow Freq (Hz)\t"
    "High Freq (Hz)\tScore\tDetector";

// Raven-compatible selection table: UTF-8, tab-separated, LF line endings,
// times with 6 decimals, frequencies with 1, no trailing tab.
inline void write_raven_table(const std::vector<Event>& events, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write selection table: " + path);
    out << kRavenHeader << "\n";
    char buf[64];
    for (const Event& e : events) {
        out << e.selection_id << "\tSpectrogram 1\t" << e.channel << "\t";
        std::snprintf(buf, sizeof buf, "%.6f\t%.6f\t%.1f\t%.1f\t%.4f", e.begin_time,
                      e.end_time, e.low_freq, e.high_freq, e.score);
        out << buf << "\t" << e.detector_id << "\n";
    }
    if (!out) throw IoError("write failed: " + path);
}

namespace detail {

inline std::vector<std::string> split_tabs(const std::string& line) {
    std::vector<std::string> out;
    std::size_t pos = 0;
    while (true) {
        std::size_t tab = line.find('\t', pos);
        if (tab == std::string::npos) {
            out.push_back(line.substr(pos));
            break;
        }
        out.push_back(line.substr(pos, tab - pos));
        pos = tab + 1;
    }
    return out;
}

}  // namespace detail

// Inverse of write_raven_table up to numeric formatting precision. Unknown
// trailing columns are ignored; Score/Detector are optional so tables from
// other tools still load.
inline std::vector<Event> read_raven_table(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open selection table: " + path);

    std::string line;
    if (!std::getline(in, line)) throw BadHeaderError(path + ": empty file");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::vector<std::string> header = detail::split_tabs(line);
    static const char* canonical[] = {"Selection",       "View",
                                      "Channel",         "Begin Time (s)",
                                      "End Time (s)",    "Low Freq (Hz)",
                                      "High Freq (Hz)"};
    if (header.size() < 7)
        throw BadHeaderError(path + ": header has " + std::to_string(header.size()) +
                             " columns, need at least 7");
    for (std::size_t i = 0; i < 7; ++i)
        if (header[i] != canonical[i])
            throw BadHeaderError(path + ": header column " + std::to_string(i + 1) +
                                 " is '" + header[i] + "', expected '" + canonical[i] + "'");
    int score_col = -1, detector_col = -1;
    for (std::size_t i = 7; i < header.size(); ++i) {
        if (header[i] == "Score") score_col = static_cast<int>(i);
        if (header[i] == "Detector") detector_col = static_cast<int>(i);
    }

    std::vector<Event> events;
    int line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::vector<std::string> fields = detail::split_tabs(line);
        if (fields.size() < 7)
            throw BadRowError(path + ":" + std::to_string(line_no) + ": only " +
                                  std::to_string(fields.size()) + " columns",
                              line_no);
        try {
            Event e;
            e.selection_id = std::stoi(fields[0]);
            e.channel = std::stoi(fields[2]);
            e.begin_time = std::stod(fields[3]);
            e.end_time = std::stod(fields[4]);
            e.low_freq = std::stod(fields[5]);
            e.high_freq = std::stod(fields[6]);
            if (score_col >= 0 && static_cast<std::size_t>(score_col) < fields.size())
                e.score = std::stod(fields[static_cast<std::size_t>(score_col)]);
            if (detector_col >= 0 && static_cast<std::size_t>(detector_col) < fields.size())
                e.detector_id = fields[static_cast<std::size_t>(detector_col)];
            events.push_back(std::move(e));
        } catch (const std::exception&) {
            throw BadRowError(path + ":" + std::to_string(line_no) + ": unparseable field",
                              line_no);
        }
    }
    return events;
}

}  // namespace soundmine
