#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <regex>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "soundmine/codec/codec.hpp"
#include "soundmine/errors.hpp"

namespace soundmine {

// One sound file as discovered on disk.
struct FileSpan {
    std::string path;
    double start_time = 0;  // seconds since epoch, UTC
    int sample_rate = 0;
    int channel_count = 0;
    std::int64_t sample_count = 0;  // frames
    FormatTag format_tag = FormatTag::WAV;
};

// A file's placement on one channel's virtual timeline. `file_offset` is the
// first file frame actually used (nonzero when an overlap truncated the head).
struct SpanPlacement {
    std::string path;
    double start_time = 0;  // of file frame 0, even after truncation
    std::int64_t virtual_start = 0;
    std::int64_t sample_count = 0;
    int channel = 0;
    FormatTag format_tag = FormatTag::WAV;
    std::int64_t file_offset = 0;  // derived, not serialized

    std::int64_t virtual_end() const { return virtual_start + sample_count; }
};

struct Gap {
    std::int64_t start_sample = 0;
    std::int64_t length = 0;  // > 0
    std::int64_t end_sample() const { return start_sample + length; }
};

struct ChannelStream {
    int stream_id = 0;
    int sample_rate = 0;
    int channel = 0;       // 0-based source channel
    double base_time = 0;  // epoch seconds at virtual sample 0
    std::vector<SpanPlacement> spans;
    std::vector<Gap> gaps;
    std::int64_t total_virtual_samples = 0;

    double duration_seconds() const {
        return static_cast<double>(total_virtual_samples) / sample_rate;
    }
};

struct SkippedFile {
    std::string path;
    std::string reason;
};

struct ArchiveMap {
    std::string root;
    std::string created_at;  // ISO 8601 UTC
    std::vector<ChannelStream> streams;
    std::vector<SkippedFile> skipped;

    // Distinct files across all streams.
    int file_count() const {
        std::vector<std::string> paths;
        for (const auto& s : streams)
            for (const auto& sp : s.spans) paths.push_back(sp.path);
        std::sort(paths.begin(), paths.end());
        paths.erase(std::unique(paths.begin(), paths.end()), paths.end());
        return static_cast<int>(paths.size());
    }

    // Epoch seconds of the archive-wide time origin.
    double base_time() const {
        double t = 0;
        bool first = true;
        for (const auto& s : streams) {
            if (first || s.base_time < t) t = s.base_time;
            first = false;
        }
        return t;
    }

    const ChannelStream& stream(int stream_id) const {
        for (const auto& s : streams)
            if (s.stream_id == stream_id) return s;
        throw OutOfRangeError("no stream with id " + std::to_string(stream_id));
    }
};

// locate() result: exactly one of span/gap ownership.
struct LocateResult {
    bool in_gap = false;
    std::size_t index = 0;        // span or gap index within the stream
    std::int64_t file_frame = 0;  // intra-file frame offset (span hits only)
};

inline LocateResult locate(const ChannelStream& stream, std::int64_t virtual_sample) {
    if (virtual_sample < 0 || virtual_sample >= stream.total_virtual_samples)
        throw OutOfRangeError("virtual sample " + std::to_string(virtual_sample) +
                              " outside [0," +
                              std::to_string(stream.total_virtual_samples) + ")");
    auto it = std::upper_bound(stream.spans.begin(), stream.spans.end(), virtual_sample,
                               [](std::int64_t v, const SpanPlacement& s) {
                                   return v < s.virtual_start;
                               });
    if (it != stream.spans.begin()) {
        const SpanPlacement& s = *std::prev(it);
        if (virtual_sample < s.virtual_end()) {
            LocateResult r;
            r.in_gap = false;
            r.index = static_cast<std::size_t>(std::prev(it) - stream.spans.begin());
            r.file_frame = s.file_offset + (virtual_sample - s.virtual_start);
            return r;
        }
    }
    auto git = std::upper_bound(stream.gaps.begin(), stream.gaps.end(), virtual_sample,
                                [](std::int64_t v, const Gap& g) {
                                    return v < g.start_sample;
                                });
    if (git != stream.gaps.begin()) {
        const Gap& g = *std::prev(git);
        if (virtual_sample < g.end_sample()) {
            LocateResult r;
            r.in_gap = true;
            r.index = static_cast<std::size_t>(std::prev(git) - stream.gaps.begin());
            return r;
        }
    }
    throw OutOfRangeError("virtual sample " + std::to_string(virtual_sample) +
                          " not covered by any span or gap");
}

// ---------------------------------------------------------------------------
// Timeline construction

struct TimelineInput {
    std::string path;
    double start_time = 0;
    std::int64_t frames = 0;
    FormatTag format = FormatTag::WAV;
};

namespace detail {
inline void emit_warning(std::vector<std::string>* sink, const std::string& msg) {
    if (sink)
        sink->push_back(msg);
    else
        std::cerr << "warning: " << msg << "\n";
}
}  // namespace detail

// Lays spans onto one virtual timeline. Holes of >= 1 sample become gaps;
// overlaps keep the earlier span's samples and truncate the later span's head.
// Sub-sample clock offsets snap to the nearest sample.
inline ChannelStream build_timeline(std::vector<TimelineInput> inputs, int channel,
                                    int sample_rate,
                                    std::vector<std::string>* warnings = nullptr) {
    ChannelStream stream;
    stream.channel = channel;
    stream.sample_rate = sample_rate;
    if (inputs.empty()) {
        stream.total_virtual_samples = 0;
        return stream;
    }
    std::sort(inputs.begin(), inputs.end(), [](const TimelineInput& a, const TimelineInput& b) {
        return a.start_time != b.start_time ? a.start_time < b.start_time : a.path < b.path;
    });
    stream.base_time = inputs.front().start_time;

    std::int64_t cursor = 0;
    for (const TimelineInput& in : inputs) {
        if (in.frames <= 0) continue;
        std::int64_t ideal =
            std::llround((in.start_time - stream.base_time) * sample_rate);
        SpanPlacement sp;
        sp.path = in.path;
        sp.start_time = in.start_time;
        sp.channel = channel;
        sp.format_tag = in.format;
        sp.sample_count = in.frames;
        sp.virtual_start = ideal;
        sp.file_offset = 0;
        if (ideal < cursor) {
            std::int64_t cut = cursor - ideal;
            if (cut >= in.frames) {
                detail::emit_warning(warnings, "span fully shadowed by earlier file: " + in.path);
                continue;
            }
            detail::emit_warning(warnings, "overlap of " + std::to_string(cut) +
                                               " samples; truncating head of " + in.path);
            sp.virtual_start = cursor;
            sp.file_offset = cut;
            sp.sample_count = in.frames - cut;
        } else if (ideal > cursor) {
            stream.gaps.push_back(Gap{cursor, ideal - cursor});
        }
        cursor = sp.virtual_end();
        stream.spans.push_back(std::move(sp));
    }
    stream.total_virtual_samples = cursor;
    return stream;
}

// ---------------------------------------------------------------------------
// Timestamp rules

// Derives a file's start time either from strftime-like fields in the
// filename ("name:%Y%m%d_%H%M%S") or from a fixed recording cadence
// ("fixed:<epoch_start>,<interval_s>").
struct TimestampRule {
    enum class Kind { FilenamePattern, FixedCadence };
    Kind kind = Kind::FilenamePattern;
    std::string pattern;
    double start_epoch = 0;
    double interval_s = 0;

    static TimestampRule parse(const std::string& text) {
        TimestampRule rule;
        if (text.rfind("name:", 0) == 0) {
            rule.kind = Kind::FilenamePattern;
            rule.pattern = text.substr(5);
            if (rule.pattern.empty())
                throw std::invalid_argument("timestamp rule 'name:' needs a pattern");
        } else if (text.rfind("fixed:", 0) == 0) {
            rule.kind = Kind::FixedCadence;
            std::string body = text.substr(6);
            auto comma = body.find(',');
            if (comma == std::string::npos)
                throw std::invalid_argument(
                    "timestamp rule 'fixed:' needs '<epoch_start>,<interval_s>'");
            rule.start_epoch = std::stod(body.substr(0, comma));
            rule.interval_s = std::stod(body.substr(comma + 1));
            if (rule.interval_s <= 0)
                throw std::invalid_argument("fixed cadence interval must be > 0");
        } else {
            throw std::invalid_argument("timestamp rule must start with 'name:' or 'fixed:'");
        }
        return rule;
    }
};

namespace detail {

// Days since 1970-01-01 for a proleptic Gregorian date.
inline std::int64_t days_from_civil(int y, int m, int d) {
    y -= m <= 2;
    const int era = (y >= 0 ? y : y - 399) / 400;
    const unsigned yoe = static_cast<unsigned>(y - era * 400);
    const unsigned doy = static_cast<unsigned>((153 * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1);
    const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
    return static_cast<std::int64_t>(era) * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

struct PatternRegex {
    std::regex re;
    std::vector<char> fields;  // capture order: Y m d H M S
};

inline PatternRegex compile_timestamp_pattern(const std::string& pattern) {
    PatternRegex out;
    std::string re;
    for (std::size_t i = 0; i < pattern.size(); ++i) {
        char c = pattern[i];
        if (c == '%') {
            if (i + 1 >= pattern.size())
                throw std::invalid_argument("dangling % in timestamp pattern");
            char f = pattern[++i];
            switch (f) {
                case 'Y': re += "(\\d{4})"; out.fields.push_back('Y'); break;
                case 'm': case 'd': case 'H': case 'M': case 'S':
                    re += "(\\d{2})";
                    out.fields.push_back(f);
                    break;
                case '%': re += "%"; break;
                default:
                    throw std::invalid_argument(std::string("unsupported timestamp field %") + f);
            }
        } else if (std::string("\\^$.|?*+()[]{}").find(c) != std::string::npos) {
            re += '\\';
            re += c;
        } else {
            re += c;
        }
    }
    if (out.fields.empty())
        throw std::invalid_argument("timestamp pattern has no %-fields");
    out.re = std::regex(re);
    return out;
}

inline double epoch_from_match(const PatternRegex& pr, const std::smatch& m) {
    int Y = 1970, mo = 1, d = 1, H = 0, Mi = 0, S = 0;
    for (std::size_t i = 0; i < pr.fields.size(); ++i) {
        int v = std::stoi(m[i + 1].str());
        switch (pr.fields[i]) {
            case 'Y': Y = v; break;
            case 'm': mo = v; break;
            case 'd': d = v; break;
            case 'H': H = v; break;
            case 'M': Mi = v; break;
            case 'S': S = v; break;
        }
    }
    if (mo < 1 || mo > 12 || d < 1 || d > 31 || H > 23 || Mi > 59 || S > 60)
        throw std::invalid_argument("timestamp fields out of range");
    return static_cast<double>(days_from_civil(Y, mo, d)) * 86400.0 + H * 3600.0 +
           Mi * 60.0 + S;
}

// All distinct epochs the pattern can extract from the filename.
inline std::vector<double> filename_epochs(const PatternRegex& pr, const std::string& name) {
    std::vector<double> out;
    auto begin = std::sregex_iterator(name.begin(), name.end(), pr.re);
    for (auto it = begin; it != std::sregex_iterator(); ++it) {
        double e = epoch_from_match(pr, *it);
        if (std::find(out.begin(), out.end(), e) == out.end()) out.push_back(e);
    }
    return out;
}

inline std::regex glob_to_regex(const std::string& glob) {
    std::string re;
    for (char c : glob) {
        switch (c) {
            case '*': re += "[^/]*"; break;
            case '?': re += "[^/]"; break;
            default:
                if (std::string("\\^$.|+()[]{}").find(c) != std::string::npos) re += '\\';
                re += c;
        }
    }
    return std::regex(re);
}

inline std::string iso8601_utc_now() {
    std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

inline std::optional<double> sidecar_start_time(const std::string& path) {
    std::string meta = path + ".meta";
    if (!std::filesystem::exists(meta)) return std::nullopt;
    try {
        ParmSet m = parse_parm_file(meta);
        if (m.contains("start_time")) return m.get_float("start_time");
    } catch (const std::exception&) {
    }
    return std::nullopt;
}

}  // namespace detail

// Scans a directory tree for sound files matching `name_pattern`, derives
// start times per `rule`, and builds one gap-annotated virtual timeline per
// (channel, sample rate). Undecodable files land in the skip list.
inline ArchiveMap scan_archive(const std::string& root, const std::string& name_pattern,
                               const TimestampRule& rule,
                               std::vector<std::string>* warnings = nullptr) {
    namespace fs = std::filesystem;
    if (!fs::exists(root)) throw IoError("archive root does not exist: " + root);

    std::regex name_re = detail::glob_to_regex(name_pattern);
    std::vector<std::string> matched;
    for (const auto& entry : fs::recursive_directory_iterator(root)) {
        if (!entry.is_regular_file()) continue;
        std::string name = entry.path().filename().string();
        if (name.size() > 5 && name.substr(name.size() - 5) == ".meta") continue;
        if (std::regex_match(name, name_re)) matched.push_back(entry.path().string());
    }
    std::sort(matched.begin(), matched.end());
    if (matched.empty())
        throw EmptyArchiveError("no files matching '" + name_pattern + "' under " + root);

    std::optional<detail::PatternRegex> pattern;
    if (rule.kind == TimestampRule::Kind::FilenamePattern)
        pattern = detail::compile_timestamp_pattern(rule.pattern);

    ArchiveMap map;
    map.root = root;
    map.created_at = detail::iso8601_utc_now();

    struct Probed {
        std::string path;
        AudioFileInfo info;
        double start_time;
    };
    std::vector<Probed> files;
    for (std::size_t k = 0; k < matched.size(); ++k) {
        const std::string& path = matched[k];
        AudioFileInfo info;
        try {
            info = probe_audio_file(path);
        } catch (const std::exception& e) {
            map.skipped.push_back({path, e.what()});
            continue;
        }
        if (info.frames <= 0) {
            map.skipped.push_back({path, "no decodable frames"});
            continue;
        }

        double start = 0;
        if (rule.kind == TimestampRule::Kind::FixedCadence) {
            start = rule.start_epoch + static_cast<double>(k) * rule.interval_s;
        } else {
            std::string base = fs::path(path).filename().string();
            std::vector<double> epochs = detail::filename_epochs(*pattern, base);
            std::optional<double> sidecar = info.sidecar_start_time;
            if (!sidecar) sidecar = detail::sidecar_start_time(path);
            if (epochs.size() > 1)
                throw AmbiguousTimestampError("pattern matches '" + base + "' " +
                                              std::to_string(epochs.size()) + " ways");
            if (epochs.size() == 1) {
                start = epochs.front();
                if (sidecar && std::abs(*sidecar - start) > 0.5 / info.sample_rate)
                    detail::emit_warning(warnings,
                                         path + ": filename and sidecar start times disagree; "
                                                "using filename");
            } else if (sidecar) {
                start = *sidecar;
            } else {
                map.skipped.push_back({path, "timestamp not parseable from filename or sidecar"});
                continue;
            }
        }
        files.push_back({path, info, start});
    }

    // Fan files out per channel, then split any mixed-rate channel per rate.
    std::map<std::pair<int, int>, std::vector<TimelineInput>> groups;
    std::map<int, std::vector<int>> rates_per_channel;
    for (const Probed& f : files) {
        for (int c = 0; c < f.info.channels; ++c) {
            groups[{c, f.info.sample_rate}].push_back(
                TimelineInput{f.path, f.start_time, f.info.frames, f.info.format});
            auto& rates = rates_per_channel[c];
            if (std::find(rates.begin(), rates.end(), f.info.sample_rate) == rates.end())
                rates.push_back(f.info.sample_rate);
        }
    }
    for (const auto& [ch, rates] : rates_per_channel)
        if (rates.size() > 1)
            detail::emit_warning(warnings, "channel " + std::to_string(ch) +
                                               " has mixed sample rates; splitting into " +
                                               std::to_string(rates.size()) + " streams");

    int next_id = 0;
    for (auto& [key, inputs] : groups) {
        ChannelStream s = build_timeline(std::move(inputs), key.first, key.second, warnings);
        s.stream_id = next_id++;
        map.streams.push_back(std::move(s));
    }
    return map;
}

// ---------------------------------------------------------------------------
// On-disk index format

inline nlohmann::ordered_json to_json(const ArchiveMap& map) {
    nlohmann::ordered_json j;
    j["root"] = map.root;
    j["created_at"] = map.created_at;
    j["streams"] = nlohmann::ordered_json::array();
    for (const auto& s : map.streams) {
        nlohmann::ordered_json js;
        js["stream_id"] = s.stream_id;
        js["sample_rate"] = s.sample_rate;
        js["spans"] = nlohmann::ordered_json::array();
        for (const auto& sp : s.spans) {
            nlohmann::ordered_json jsp;
            jsp["path"] = sp.path;
            jsp["start_time"] = sp.start_time;
            jsp["virtual_start"] = sp.virtual_start;
            jsp["sample_count"] = sp.sample_count;
            jsp["channel"] = sp.channel;
            jsp["format_tag"] = format_tag_name(sp.format_tag);
            js["spans"].push_back(std::move(jsp));
        }
        js["gaps"] = nlohmann::ordered_json::array();
        for (const auto& g : s.gaps) {
            nlohmann::ordered_json jg;
            jg["start_sample"] = g.start_sample;
            jg["length"] = g.length;
            js["gaps"].push_back(std::move(jg));
        }
        j["streams"].push_back(std::move(js));
    }
    j["skipped"] = nlohmann::ordered_json::array();
    for (const auto& sk : map.skipped) {
        nlohmann::ordered_json js;
        js["path"] = sk.path;
        js["reason"] = sk.reason;
        j["skipped"].push_back(std::move(js));
    }
    return j;
}

inline ArchiveMap archive_map_from_json(const nlohmann::json& j) {
    ArchiveMap map;
    map.root = j.at("root").get<std::string>();
    map.created_at = j.at("created_at").get<std::string>();
    for (const auto& js : j.at("streams")) {
        ChannelStream s;
        s.stream_id = js.at("stream_id").get<int>();
        s.sample_rate = js.at("sample_rate").get<int>();
        for (const auto& jsp : js.at("spans")) {
            SpanPlacement sp;
            sp.path = jsp.at("path").get<std::string>();
            sp.start_time = jsp.at("start_time").get<double>();
            sp.virtual_start = jsp.at("virtual_start").get<std::int64_t>();
            sp.sample_count = jsp.at("sample_count").get<std::int64_t>();
            sp.channel = jsp.at("channel").get<int>();
            sp.format_tag = format_tag_from_name(jsp.at("format_tag").get<std::string>());
            s.spans.push_back(std::move(sp));
        }
        for (const auto& jg : js.at("gaps"))
            s.gaps.push_back(Gap{jg.at("start_sample").get<std::int64_t>(),
                                 jg.at("length").get<std::int64_t>()});
        if (!s.spans.empty()) {
            s.channel = s.spans.front().channel;
            // The first span is never head-truncated, so its file offset is 0
            // and the stream origin follows from its placement alone.
            const SpanPlacement& first = s.spans.front();
            s.base_time = first.start_time -
                          static_cast<double>(first.virtual_start) / s.sample_rate;
            // Recover head-truncation offsets: where the file would have
            // started, were it not cut by an earlier span.
            for (auto& sp : s.spans) {
                std::int64_t ideal =
                    std::llround((sp.start_time - s.base_time) * s.sample_rate);
                sp.file_offset = sp.virtual_start - ideal;
                if (sp.file_offset < 0) sp.file_offset = 0;
            }
            const SpanPlacement& last = s.spans.back();
            s.total_virtual_samples = last.virtual_end();
        }
        map.streams.push_back(std::move(s));
    }
    for (const auto& js : j.at("skipped"))
        map.skipped.push_back(
            {js.at("path").get<std::string>(), js.at("reason").get<std::string>()});
    return map;
}

inline void save_archive_map(const ArchiveMap& map, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write: " + path);
    out << to_json(map).dump(2) << "\n";
}

inline ArchiveMap load_archive_map(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open archive index: " + path);
    nlohmann::json j = nlohmann::json::parse(in);
    return archive_map_from_json(j);
}

}  // namespace soundmine
