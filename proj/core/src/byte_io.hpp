#pragma once

// Little-endian encoding helpers shared by the binary file formats.

#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <ezdl/error.hpp>

namespace ezdl::detail {

class ByteWriter {
public:
    void magic(std::string_view tag) { bytes_.insert(bytes_.end(), tag.begin(), tag.end()); }

    template <class T>
    void uint(T value)
    {
        for (std::size_t i = 0; i < sizeof(T); ++i) bytes_.push_back(static_cast<std::uint8_t>(value >> (8 * i)));
    }

    void f64(double value) { uint(std::bit_cast<std::uint64_t>(value)); }

    std::vector<std::uint8_t> take() { return std::move(bytes_); }

private:
    std::vector<std::uint8_t> bytes_;
};

class ByteReader {
public:
    ByteReader(std::span<const std::uint8_t> bytes, std::string_view what) : bytes_(bytes), what_(what) {}

    void expect_magic(std::string_view tag)
    {
        need(tag.size());
        if (std::memcmp(bytes_.data() + pos_, tag.data(), tag.size()) != 0) {
            throw Error(ErrorKind::MalformedHeader, std::string(what_) + ": missing magic \"" + std::string(tag) + "\"");
        }
        pos_ += tag.size();
    }

    template <class T>
    T uint()
    {
        need(sizeof(T));
        T value = 0;
        for (std::size_t i = 0; i < sizeof(T); ++i) value |= static_cast<T>(static_cast<T>(bytes_[pos_ + i]) << (8 * i));
        pos_ += sizeof(T);
        return value;
    }

    double f64() { return std::bit_cast<double>(uint<std::uint64_t>()); }

    std::size_t remaining() const noexcept { return bytes_.size() - pos_; }

private:
    void need(std::size_t n) const
    {
        if (bytes_.size() - pos_ < n) throw Error(ErrorKind::TruncatedData, std::string(what_) + ": unexpected end of data");
    }

    std::span<const std::uint8_t> bytes_;
    std::string_view what_;
    std::size_t pos_ = 0;
};

std::vector<std::uint8_t> read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);

} // namespace ezdl::detail
