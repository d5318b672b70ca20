#include <gtest/gtest.h>

#include <cstdint>
#include <filesystem>
#include <vector>

#include <ezdl/dictionary.hpp>
#include <ezdl/error.hpp>

using namespace ezdl;

namespace {

Dictionary small_dictionary()
{
    Dictionary d{Matrix::from_rows({{1.0, -0.5}, {0.25, 2.0}, {0.0, 1e-300}, {-3.5, 7.0}}), PatchShape{2, 2},
                 GridShape{1, 2}};
    return d;
}

} // namespace

TEST(DictionaryFormat, ExactLayout)
{
    const std::vector<std::uint8_t> bytes = encode_dictionary(small_dictionary());
    ASSERT_EQ(bytes.size(), 4u + 4 + 4 + 4 + 4 * 2 + 8 * 8);
    EXPECT_EQ(std::string(bytes.begin(), bytes.begin() + 4), "EZDL");
    const std::vector<std::uint8_t> header{1, 0, 0, 0, 4, 0, 0, 0, 2, 0, 0, 0, 2, 0, 2, 0, 1, 0, 2, 0};
    EXPECT_TRUE(std::equal(header.begin(), header.end(), bytes.begin() + 4));
    // First value 1.0 = 0x3FF0000000000000, little-endian.
    const std::vector<std::uint8_t> one{0, 0, 0, 0, 0, 0, 0xF0, 0x3F};
    EXPECT_TRUE(std::equal(one.begin(), one.end(), bytes.begin() + 24));
}

TEST(DictionaryFormat, RoundTrip)
{
    const Dictionary d = small_dictionary();
    const Dictionary back = decode_dictionary(encode_dictionary(d));
    EXPECT_EQ(back.atoms, d.atoms);
    EXPECT_EQ(back.patch_shape, d.patch_shape);
    EXPECT_EQ(back.grid_shape, d.grid_shape);
}

TEST(DictionaryFormat, AbsentShapesAreZeros)
{
    Dictionary d{Matrix(3, 2, 0.5), std::nullopt, std::nullopt};
    const std::vector<std::uint8_t> bytes = encode_dictionary(d);
    for (std::size_t i = 16; i < 24; ++i) EXPECT_EQ(bytes[i], 0);
    const Dictionary back = decode_dictionary(bytes);
    EXPECT_FALSE(back.patch_shape);
    EXPECT_FALSE(back.grid_shape);
}

TEST(DictionaryFormat, Errors)
{
    std::vector<std::uint8_t> bytes = encode_dictionary(small_dictionary());
    auto kind_of = [](const std::vector<std::uint8_t>& b) {
        try {
            decode_dictionary(b);
        } catch (const Error& e) {
            return e.kind();
        }
        return ErrorKind::Io;
    };
    std::vector<std::uint8_t> truncated(bytes.begin(), bytes.end() - 1);
    EXPECT_EQ(kind_of(truncated), ErrorKind::TruncatedData);
    std::vector<std::uint8_t> magic = bytes;
    magic[0] = 'X';
    EXPECT_EQ(kind_of(magic), ErrorKind::MalformedHeader);
    std::vector<std::uint8_t> version = bytes;
    version[4] = 2;
    EXPECT_EQ(kind_of(version), ErrorKind::MalformedHeader);
}

TEST(DictionaryFormat, FileRoundTrip)
{
    const auto path = std::filesystem::temp_directory_path() / "ezdl_dictionary_test.ezdl";
    save_dictionary(path, small_dictionary());
    EXPECT_EQ(load_dictionary(path).atoms, small_dictionary().atoms);
    std::filesystem::remove(path);
}

TEST(Dictionary, CheckRejectsInconsistentShapes)
{
    Dictionary d = small_dictionary();
    d.patch_shape = PatchShape{3, 3};
    EXPECT_THROW(d.check(), Error);
}
