#include <ezdl/dictionary.hpp>

#include <fstream>
#include <iterator>
#include <limits>
#include <string>

#include <ezdl/error.hpp>

#include "byte_io.hpp"

namespace ezdl {

namespace detail {

std::vector<std::uint8_t> read_file(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorKind::Io, "cannot open " + path.string());
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> bytes)
{
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorKind::Io, "cannot write " + path.string());
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw Error(ErrorKind::Io, "short write to " + path.string());
}

} // namespace detail

void Dictionary::check() const
{
    if (atoms.empty()) throw Error(ErrorKind::InvalidConfig, "dictionary has no atoms");
    if (patch_shape && patch_shape->height * patch_shape->width != dim()) {
        throw Error(ErrorKind::InvalidConfig, "patch shape does not match the atom dimension");
    }
    if (grid_shape && grid_shape->rows * grid_shape->cols != size()) {
        throw Error(ErrorKind::InvalidConfig, "grid shape does not match the atom count");
    }
}

std::vector<std::uint8_t> encode_dictionary(const Dictionary& dict)
{
    dict.check();
    const auto fits16 = [](std::size_t v) { return v <= std::numeric_limits<std::uint16_t>::max(); };
    const auto fits32 = [](std::size_t v) { return v <= std::numeric_limits<std::uint32_t>::max(); };
    const PatchShape ps = dict.patch_shape.value_or(PatchShape{});
    const GridShape gs = dict.grid_shape.value_or(GridShape{});
    if (!fits32(dict.dim()) || !fits32(dict.size()) || !fits16(ps.height) || !fits16(ps.width) || !fits16(gs.rows)
        || !fits16(gs.cols)) {
        throw Error(ErrorKind::OutOfRange, "dictionary dimensions exceed the file format");
    }

    detail::ByteWriter w;
    w.magic("EZDL");
    w.uint<std::uint32_t>(kDictionaryFormatVersion);
    w.uint<std::uint32_t>(static_cast<std::uint32_t>(dict.dim()));
    w.uint<std::uint32_t>(static_cast<std::uint32_t>(dict.size()));
    w.uint<std::uint16_t>(static_cast<std::uint16_t>(ps.height));
    w.uint<std::uint16_t>(static_cast<std::uint16_t>(ps.width));
    w.uint<std::uint16_t>(static_cast<std::uint16_t>(gs.rows));
    w.uint<std::uint16_t>(static_cast<std::uint16_t>(gs.cols));
    for (double v : dict.atoms.vec()) w.f64(v);
    return w.take();
}

Dictionary decode_dictionary(std::span<const std::uint8_t> bytes)
{
    detail::ByteReader r(bytes, "dictionary");
    r.expect_magic("EZDL");
    const auto version = r.uint<std::uint32_t>();
    if (version != kDictionaryFormatVersion) {
        throw Error(ErrorKind::MalformedHeader, "unsupported dictionary version " + std::to_string(version));
    }
    const std::size_t d = r.uint<std::uint32_t>();
    const std::size_t n = r.uint<std::uint32_t>();
    const std::size_t ph = r.uint<std::uint16_t>();
    const std::size_t pw = r.uint<std::uint16_t>();
    const std::size_t gr = r.uint<std::uint16_t>();
    const std::size_t gc = r.uint<std::uint16_t>();
    if (d == 0 || n == 0) throw Error(ErrorKind::MalformedHeader, "dictionary with zero dimension");
    if (r.remaining() < d * n * 8) throw Error(ErrorKind::TruncatedData, "dictionary payload is short");

    Dictionary dict{Matrix(d, n), std::nullopt, std::nullopt};
    for (double& v : dict.atoms.vec()) v = r.f64();
    if (ph != 0 || pw != 0) dict.patch_shape = PatchShape{ph, pw};
    if (gr != 0 || gc != 0) dict.grid_shape = GridShape{gr, gc};
    dict.check();
    return dict;
}

void save_dictionary(const std::filesystem::path& path, const Dictionary& dict)
{
    detail::write_file(path, encode_dictionary(dict));
}

Dictionary load_dictionary(const std::filesystem::path& path) { return decode_dictionary(detail::read_file(path)); }

} // namespace ezdl
