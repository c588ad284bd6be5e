#pragma once

#include <cstdint>
#include <cstring>
#include <string>

#include "cartograf/errors.hpp"

// Little-endian binary encode/decode used by features.bin and checkpoints.
namespace cartograf::binio {

inline void put_u16(std::string& out, uint16_t v) {
    for (int i = 0; i < 2; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

inline void put_u32(std::string& out, uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

inline void put_u64(std::string& out, uint64_t v) {
    for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

inline void put_f64(std::string& out, double v) {
    uint64_t bits;
    std::memcpy(&bits, &v, sizeof bits);
    put_u64(out, bits);
}

class Reader {
public:
    Reader(const std::string& data, std::string origin)
        : data_(data), origin_(std::move(origin)) {}

    uint16_t u16() { return static_cast<uint16_t>(bytes(2)); }
    uint32_t u32() { return static_cast<uint32_t>(bytes(4)); }
    uint64_t u64() { return bytes(8); }
    uint8_t u8() { return static_cast<uint8_t>(bytes(1)); }

    double f64() {
        uint64_t bits = u64();
        double v;
        std::memcpy(&v, &bits, sizeof v);
        return v;
    }

    std::string str(size_t n) {
        need(n);
        std::string s = data_.substr(pos_, n);
        pos_ += n;
        return s;
    }

    bool at_end() const { return pos_ == data_.size(); }

private:
    uint64_t bytes(size_t n) {
        need(n);
        uint64_t v = 0;
        for (size_t i = 0; i < n; ++i)
            v |= static_cast<uint64_t>(static_cast<unsigned char>(data_[pos_ + i])) << (8 * i);
        pos_ += n;
        return v;
    }

    void need(size_t n) {
        if (pos_ + n > data_.size()) throw DataError(origin_ + ": truncated file");
    }

    const std::string& data_;
    std::string origin_;
    size_t pos_ = 0;
};

} // namespace cartograf::binio
