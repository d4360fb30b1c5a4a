#pragma once

#include <cstdint>
#include <cstring>
#include <fstream>
#include <string>
#include <vector>

#include "soundmine/errors.hpp"

namespace soundmine::flac {

struct FlacInfo {
    int sample_rate = 0;
    int channels = 0;
    int bits_per_sample = 0;
    std::int64_t total_samples = 0;  // 0 if unknown in STREAMINFO
};

struct DecodeResult {
    FlacInfo info;
    std::vector<std::vector<float>> channels;  // [channel][frame], normalized
    bool truncated = false;  // stream ended or went bad mid-frame; prefix kept
    std::string fault;
};

namespace detail {

inline std::uint8_t crc8(const std::uint8_t* data, std::size_t n) {
    std::uint8_t crc = 0;
    for (std::size_t i = 0; i < n; ++i) {
        crc ^= data[i];
        for (int b = 0; b < 8; ++b)
            crc = (crc & 0x80) ? static_cast<std::uint8_t>((crc << 1) ^ 0x07)
                               : static_cast<std::uint8_t>(crc << 1);
    }
    return crc;
}

inline std::uint16_t crc16(const std::uint8_t* data, std::size_t n) {
    std::uint16_t crc = 0;
    for (std::size_t i = 0; i < n; ++i) {
        crc ^= static_cast<std::uint16_t>(data[i]) << 8;
        for (int b = 0; b < 8; ++b)
            crc = (crc & 0x8000) ? static_cast<std::uint16_t>((crc << 1) ^ 0x8005)
                                 : static_cast<std::uint16_t>(crc << 1);
    }
    return crc;
}

class BitReader {
public:
    BitReader(const std::uint8_t* data, std::size_t size) : data_(data), size_(size) {}

    std::uint64_t read_bits(int n) {
        std::uint64_t v = 0;
        while (n > 0) {
            if (byte_ >= size_) {
                failed_ = true;
                return 0;
            }
            int avail = 8 - bit_;
            int take = n < avail ? n : avail;
            int shift = avail - take;
            std::uint64_t chunk = (data_[byte_] >> shift) & ((1u << take) - 1);
            v = (v << take) | chunk;
            bit_ += take;
            n -= take;
            if (bit_ == 8) {
                bit_ = 0;
                ++byte_;
            }
        }
        return v;
    }

    std::int64_t read_signed(int n) {
        if (n == 0) return 0;
        std::uint64_t v = read_bits(n);
        std::uint64_t sign = 1ull << (n - 1);
        return (v & sign) ? static_cast<std::int64_t>(v) - (static_cast<std::int64_t>(1) << n)
                          : static_cast<std::int64_t>(v);
    }

    // Counts 0 bits up to the terminating 1.
    std::uint64_t read_unary() {
        std::uint64_t q = 0;
        while (true) {
            if (byte_ >= size_) {
                failed_ = true;
                return 0;
            }
            if (read_bits(1)) return q;
            if (failed_) return 0;
            ++q;
            if (q > 1u << 24) {  // runaway unary means a corrupt stream
                failed_ = true;
                return 0;
            }
        }
    }

    void align() {
        if (bit_ != 0) {
            bit_ = 0;
            ++byte_;
        }
    }

    bool at_end() const { return byte_ >= size_; }
    bool failed() const { return failed_; }
    std::size_t byte_pos() const { return byte_; }
    void seek_byte(std::size_t pos) {
        byte_ = pos;
        bit_ = 0;
    }

private:
    const std::uint8_t* data_;
    std::size_t size_;
    std::size_t byte_ = 0;
    int bit_ = 0;
    bool failed_ = false;
};

// UTF-8-style coded number used for frame/sample indices (up to 36 bits).
inline bool read_utf8_number(BitReader& br, std::uint64_t& out) {
    std::uint64_t b0 = br.read_bits(8);
    if (br.failed()) return false;
    if (b0 < 0x80) {
        out = b0;
        return true;
    }
    int n = 0;
    for (std::uint64_t mask = 0x40; b0 & mask; mask >>= 1) ++n;
    if (n < 1 || n > 6) return false;
    std::uint64_t v = b0 & (0x3Fu >> n);
    for (int i = 0; i < n; ++i) {
        std::uint64_t b = br.read_bits(8);
        if (br.failed() || (b & 0xC0) != 0x80) return false;
        v = (v << 6) | (b & 0x3F);
    }
    out = v;
    return true;
}

inline bool decode_residual(BitReader& br, int order, int block_size,
                            std::vector<std::int64_t>& out) {
    int method = static_cast<int>(br.read_bits(2));
    if (method > 1) return false;
    int param_bits = method == 0 ? 4 : 5;
    int escape = method == 0 ? 15 : 31;
    int porder = static_cast<int>(br.read_bits(4));
    int nparts = 1 << porder;
    if (block_size % nparts != 0) return false;
    int idx = order;
    for (int p = 0; p < nparts; ++p) {
        int count = (block_size >> porder) - (p == 0 ? order : 0);
        if (count < 0) return false;
        int param = static_cast<int>(br.read_bits(param_bits));
        if (br.failed()) return false;
        if (param == escape) {
            int raw_bits = static_cast<int>(br.read_bits(5));
            for (int i = 0; i < count; ++i) out[idx++] = br.read_signed(raw_bits);
        } else {
            for (int i = 0; i < count; ++i) {
                std::uint64_t q = br.read_unary();
                std::uint64_t r = param > 0 ? br.read_bits(param) : 0;
                std::uint64_t u = (q << param) | r;
                out[idx++] = static_cast<std::int64_t>(u >> 1) ^
                             -static_cast<std::int64_t>(u & 1);
            }
        }
        if (br.failed()) return false;
    }
    return true;
}

inline bool decode_subframe(BitReader& br, int block_size, int bps,
                            std::vector<std::int64_t>& out) {
    if (br.read_bits(1) != 0) return false;  // padding bit
    int type = static_cast<int>(br.read_bits(6));
    int wasted = 0;
    if (br.read_bits(1)) wasted = static_cast<int>(br.read_unary()) + 1;
    if (br.failed()) return false;
    int eff = bps - wasted;
    if (eff <= 0 || eff > 33) return false;

    out.assign(static_cast<std::size_t>(block_size), 0);

    if (type == 0) {  // CONSTANT
        std::int64_t v = br.read_signed(eff);
        for (auto& s : out) s = v;
    } else if (type == 1) {  // VERBATIM
        for (auto& s : out) s = br.read_signed(eff);
    } else if ((type & 0x38) == 0x08 && (type & 0x07) <= 4) {  // FIXED
        int order = type & 0x07;
        if (order > block_size) return false;
        for (int i = 0; i < order; ++i) out[static_cast<std::size_t>(i)] = br.read_signed(eff);
        if (!decode_residual(br, order, block_size, out)) return false;
        for (int i = order; i < block_size; ++i) {
            auto& x = out;
            std::int64_t p = 0;
            switch (order) {
                case 0: p = 0; break;
                case 1: p = x[i - 1]; break;
                case 2: p = 2 * x[i - 1] - x[i - 2]; break;
                case 3: p = 3 * x[i - 1] - 3 * x[i - 2] + x[i - 3]; break;
                case 4: p = 4 * x[i - 1] - 6 * x[i - 2] + 4 * x[i - 3] - x[i - 4]; break;
            }
            x[i] += p;
        }
    } else if (type & 0x20) {  // LPC
        int order = (type & 0x1F) + 1;
        if (order > block_size) return false;
        for (int i = 0; i < order; ++i) out[static_cast<std::size_t>(i)] = br.read_signed(eff);
        int precision = static_cast<int>(br.read_bits(4)) + 1;
        if (precision == 16 || br.failed()) return false;  // 0b1111 is invalid
        int shift = static_cast<int>(br.read_signed(5));
        if (shift < 0) return false;
        std::vector<std::int64_t> coef(static_cast<std::size_t>(order));
        for (auto& c : coef) c = br.read_signed(precision);
        if (!decode_residual(br, order, block_size, out)) return false;
        for (int i = order; i < block_size; ++i) {
            std::int64_t acc = 0;
            for (int j = 0; j < order; ++j) acc += coef[static_cast<std::size_t>(j)] * out[i - 1 - j];
            out[static_cast<std::size_t>(i)] += acc >> shift;
        }
    } else {
        return false;  // reserved type
    }
    if (br.failed()) return false;
    if (wasted > 0)
        for (auto& s : out) s = static_cast<std::int64_t>(static_cast<std::uint64_t>(s) << wasted);
    return true;
}

}  // namespace detail

inline DecodeResult decode_all(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open: " + path);
    std::vector<std::uint8_t> data((std::istreambuf_iterator<char>(in)),
                                   std::istreambuf_iterator<char>());

    if (data.size() < 42 || std::memcmp(data.data(), "fLaC", 4) != 0)
        throw CorruptContainerError(path + ": not a FLAC stream");

    DecodeResult res;
    std::size_t pos = 4;
    bool have_streaminfo = false;
    while (pos + 4 <= data.size()) {
        std::uint8_t hdr = data[pos];
        bool last = hdr & 0x80;
        int type = hdr & 0x7F;
        std::size_t len = (std::size_t(data[pos + 1]) << 16) |
                          (std::size_t(data[pos + 2]) << 8) | data[pos + 3];
        pos += 4;
        if (pos + len > data.size())
            throw CorruptContainerError(path + ": metadata block overruns file");
        if (type == 0) {
            if (len < 34) throw CorruptContainerError(path + ": STREAMINFO too small");
            const std::uint8_t* p = data.data() + pos;
            res.info.sample_rate = (int(p[10]) << 12) | (int(p[11]) << 4) | (p[12] >> 4);
            res.info.channels = ((p[12] >> 1) & 0x07) + 1;
            res.info.bits_per_sample = (((p[12] & 0x01) << 4) | (p[13] >> 4)) + 1;
            res.info.total_samples =
                (std::int64_t(p[13] & 0x0F) << 32) | (std::int64_t(p[14]) << 24) |
                (std::int64_t(p[15]) << 16) | (std::int64_t(p[16]) << 8) | p[17];
            have_streaminfo = true;
        }
        pos += len;
        if (last) break;
    }
    if (!have_streaminfo || res.info.sample_rate <= 0 || res.info.channels <= 0)
        throw CorruptContainerError(path + ": missing or invalid STREAMINFO");

    res.channels.resize(static_cast<std::size_t>(res.info.channels));
    const double norm = 1.0 / static_cast<double>(1ll << (res.info.bits_per_sample - 1));

    detail::BitReader br(data.data(), data.size());
    br.seek_byte(pos);
    std::vector<std::vector<std::int64_t>> sub(static_cast<std::size_t>(res.info.channels));

    while (!br.at_end()) {
        std::size_t frame_start = br.byte_pos();
        if (br.read_bits(14) != 0x3FFE || br.read_bits(1) != 0) {
            res.truncated = true;
            res.fault = "bad frame sync";
            break;
        }
        br.read_bits(1);  // blocking strategy
        int bs_code = static_cast<int>(br.read_bits(4));
        int sr_code = static_cast<int>(br.read_bits(4));
        int chan_code = static_cast<int>(br.read_bits(4));
        int bps_code = static_cast<int>(br.read_bits(3));
        br.read_bits(1);  // reserved

        std::uint64_t number;
        if (!detail::read_utf8_number(br, number)) {
            res.truncated = true;
            res.fault = "bad frame number";
            break;
        }

        int block_size = 0;
        switch (bs_code) {
            case 1: block_size = 192; break;
            case 2: case 3: case 4: case 5: block_size = 576 << (bs_code - 2); break;
            case 6: block_size = static_cast<int>(br.read_bits(8)) + 1; break;
            case 7: block_size = static_cast<int>(br.read_bits(16)) + 1; break;
            default:
                if (bs_code >= 8) block_size = 256 << (bs_code - 8);
                break;
        }
        if (sr_code == 12) br.read_bits(8);
        else if (sr_code == 13 || sr_code == 14) br.read_bits(16);

        int bps = res.info.bits_per_sample;
        switch (bps_code) {
            case 1: bps = 8; break;
            case 2: bps = 12; break;
            case 4: bps = 16; break;
            case 5: bps = 20; break;
            case 6: bps = 24; break;
            case 7: bps = 32; break;
            default: break;
        }

        std::size_t crc8_pos = br.byte_pos();
        std::uint8_t expect_crc8 = static_cast<std::uint8_t>(br.read_bits(8));
        if (br.failed() || block_size <= 0 ||
            detail::crc8(data.data() + frame_start, crc8_pos - frame_start) != expect_crc8) {
            res.truncated = true;
            res.fault = "frame header CRC mismatch";
            break;
        }

        int nch = res.info.channels;
        bool ok = true;
        if (chan_code <= 7) {
            ok = (chan_code + 1 == nch);
            for (int c = 0; ok && c < nch; ++c)
                ok = detail::decode_subframe(br, block_size, bps, sub[static_cast<std::size_t>(c)]);
        } else if (chan_code >= 8 && chan_code <= 10) {
            ok = (nch == 2);
            if (ok) {
                int bps0 = bps + (chan_code == 9 ? 1 : 0);
                int bps1 = bps + (chan_code == 9 ? 0 : 1);
                ok = detail::decode_subframe(br, block_size, bps0, sub[0]) &&
                     detail::decode_subframe(br, block_size, bps1, sub[1]);
            }
            if (ok) {
                for (int i = 0; i < block_size; ++i) {
                    std::int64_t a = sub[0][static_cast<std::size_t>(i)];
                    std::int64_t b = sub[1][static_cast<std::size_t>(i)];
                    if (chan_code == 8) {  // left/side
                        sub[1][static_cast<std::size_t>(i)] = a - b;
                    } else if (chan_code == 9) {  // right/side: a is side, b is right
                        sub[0][static_cast<std::size_t>(i)] = a + b;
                    } else {  // mid/side
                        std::int64_t mid = (a << 1) | (b & 1);
                        sub[0][static_cast<std::size_t>(i)] = (mid + b) >> 1;
                        sub[1][static_cast<std::size_t>(i)] = (mid - b) >> 1;
                    }
                }
            }
        } else {
            ok = false;
        }

        if (ok) {
            br.align();
            std::size_t crc16_pos = br.byte_pos();
            std::uint16_t expect_crc16 = static_cast<std::uint16_t>(br.read_bits(16));
            ok = !br.failed() &&
                 detail::crc16(data.data() + frame_start, crc16_pos - frame_start) ==
                     expect_crc16;
            if (!ok) res.fault = "frame CRC mismatch";
        } else if (res.fault.empty()) {
            res.fault = "bad subframe";
        }

        if (!ok) {
            res.truncated = true;
            break;
        }
        for (int c = 0; c < nch; ++c) {
            auto& dst = res.channels[static_cast<std::size_t>(c)];
            for (int i = 0; i < block_size; ++i)
                dst.push_back(static_cast<float>(
                    static_cast<double>(sub[static_cast<std::size_t>(c)][static_cast<std::size_t>(i)]) * norm));
        }
        if (res.info.total_samples > 0 &&
            static_cast<std::int64_t>(res.channels[0].size()) >= res.info.total_samples)
            break;
    }

    if (res.info.total_samples > 0 &&
        static_cast<std::int64_t>(res.channels[0].size()) < res.info.total_samples)
        res.truncated = true;
    return res;
}

inline FlacInfo probe(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open: " + path);
    std::vector<std::uint8_t> head(4 + 4 + 34);
    in.read(reinterpret_cast<char*>(head.data()), static_cast<std::streamsize>(head.size()));
    if (in.gcount() < static_cast<std::streamsize>(head.size()) ||
        std::memcmp(head.data(), "fLaC", 4) != 0 || (head[4] & 0x7F) != 0)
        throw CorruptContainerError(path + ": not a FLAC stream with leading STREAMINFO");
    const std::uint8_t* p = head.data() + 8;
    FlacInfo info;
    info.sample_rate = (int(p[10]) << 12) | (int(p[11]) << 4) | (p[12] >> 4);
    info.channels = ((p[12] >> 1) & 0x07) + 1;
    info.bits_per_sample = (((p[12] & 0x01) << 4) | (p[13] >> 4)) + 1;
    info.total_samples = (std::int64_t(p[13] & 0x0F) << 32) | (std::int64_t(p[14]) << 24) |
                         (std::int64_t(p[15]) << 16) | (std::int64_t(p[16]) << 8) | p[17];
    if (info.sample_rate <= 0 || info.channels <= 0)
        throw CorruptContainerError(path + ": invalid STREAMINFO");
    return info;
}

}  // namespace soundmine::flac
