#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <vector>

#include <ezdl/linalg.hpp>

namespace ezdl {

/// Pixel layout of an image patch; height * width equals the sample dimension.
struct PatchShape {
    std::size_t height = 0;
    std::size_t width = 0;
    bool operator==(const PatchShape&) const = default;
};

/// Layout of the atoms on a topographic grid; rows * cols equals the atom count.
struct GridShape {
    std::size_t rows = 0;
    std::size_t cols = 0;
    bool operator==(const GridShape&) const = default;
};

/// d x n matrix whose columns are the atoms, plus optional layout metadata.
struct Dictionary {
    Matrix atoms;
    std::optional<PatchShape> patch_shape;
    std::optional<GridShape> grid_shape;

    std::size_t dim() const noexcept { return atoms.rows(); }
    std::size_t size() const noexcept { return atoms.cols(); }

    /// Throws InvalidConfig when the metadata disagrees with the matrix shape.
    void check() const;
};

/// "EZDL" file, version 1:
///   magic "EZDL" | u32 version | u32 d | u32 n | u16 p_h | u16 p_w | u16 r | u16 c
///   | d*n f64 column-major
/// All integers and floats little-endian; absent shapes are stored as zeros.
inline constexpr std::uint32_t kDictionaryFormatVersion = 1;

std::vector<std::uint8_t> encode_dictionary(const Dictionary& dict);
Dictionary decode_dictionary(std::span<const std::uint8_t> bytes);

void save_dictionary(const std::filesystem::path& path, const Dictionary& dict);
Dictionary load_dictionary(const std::filesystem::path& path);

} // namespace ezdl
