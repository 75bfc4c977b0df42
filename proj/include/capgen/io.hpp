#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <string>
#include <string_view>

#include "capgen/errors.hpp"

namespace capgen::io {

// ---- little-endian byte packing into a std::string buffer ----

inline void put_u16le(std::string& out, std::uint16_t v) {
    out.push_back(static_cast<char>(v & 0xFF));
    out.push_back(static_cast<char>((v >> 8) & 0xFF));
}

inline void put_u32le(std::string& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

inline void put_f32le(std::string& out, float v) { put_u32le(out, std::bit_cast<std::uint32_t>(v)); }

// Cursor-style reader over an immutable byte view. `need` throws the caller's
// truncation error type with a location message.
class Reader {
public:
    explicit Reader(std::string_view bytes) : bytes_(bytes) {}

    std::size_t remaining() const { return bytes_.size() - pos_; }
    bool at_end() const { return pos_ == bytes_.size(); }

    template <typename TruncErr>
    void need(std::size_t n, const char* what) const {
        if (remaining() < n) throw TruncErr(std::string("unexpected end of data while reading ") + what);
    }

    template <typename TruncErr>
    std::uint16_t get_u16le(const char* what) {
        need<TruncErr>(2, what);
        std::uint16_t v = static_cast<std::uint16_t>(static_cast<unsigned char>(bytes_[pos_])) |
                          static_cast<std::uint16_t>(static_cast<unsigned char>(bytes_[pos_ + 1])) << 8;
        pos_ += 2;
        return v;
    }

    template <typename TruncErr>
    std::uint32_t get_u32le(const char* what) {
        need<TruncErr>(4, what);
        std::uint32_t v = 0;
        for (int i = 0; i < 4; ++i)
            v |= static_cast<std::uint32_t>(static_cast<unsigned char>(bytes_[pos_ + i])) << (8 * i);
        pos_ += 4;
        return v;
    }

    template <typename TruncErr>
    float get_f32le(const char* what) {
        return std::bit_cast<float>(get_u32le<TruncErr>(what));
    }

    template <typename TruncErr>
    std::string_view get_bytes(std::size_t n, const char* what) {
        need<TruncErr>(n, what);
        std::string_view v = bytes_.substr(pos_, n);
        pos_ += n;
        return v;
    }

private:
    std::string_view bytes_;
    std::size_t pos_ = 0;
};

// ---- whole-file helpers ----

std::string read_file(const std::filesystem::path& path);

// Writes to `<path>.tmp` then renames, so readers never observe a partial file.
void write_file_atomic(const std::filesystem::path& path, std::string_view contents);

}  // namespace capgen::io
