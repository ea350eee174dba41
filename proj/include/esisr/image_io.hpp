#pragma once

#include <cstdint>
#include <cstdio>
#include <csetjmp>
#include <fstream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include <png.h>

#include "esisr/errors.hpp"
#include "esisr/image.hpp"

namespace esisr {

namespace detail {

inline bool ends_with_ci(const std::string& s, const std::string& suffix) {
    if (s.size() < suffix.size()) return false;
    for (size_t i = 0; i < suffix.size(); ++i) {
        char a = s[s.size() - suffix.size() + i];
        char b = suffix[i];
        if (std::tolower(static_cast<unsigned char>(a)) != std::tolower(static_cast<unsigned char>(b)))
            return false;
    }
    return true;
}

struct FileCloser {
    void operator()(std::FILE* f) const { if (f) std::fclose(f); }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

// ---- PNM (binary P5/P6) ----

inline int pnm_read_token(std::istream& in, std::string& tok) {
    tok.clear();
    int ch;
    while ((ch = in.get()) != EOF) {
        if (ch == '#') {                       // comment to end of line
            while ((ch = in.get()) != EOF && ch != '\n') {}
            continue;
        }
        if (!std::isspace(ch)) break;
    }
    if (ch == EOF) return -1;
    do {
        tok.push_back(static_cast<char>(ch));
        ch = in.get();
    } while (ch != EOF && !std::isspace(ch));
    return 0;
}

inline Image load_pnm(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path);
    std::string magic, tok;
    if (pnm_read_token(in, magic) < 0) throw FormatError(path + ": empty PNM file");
    int channels;
    if (magic == "P5") channels = 1;
    else if (magic == "P6") channels = 3;
    else throw FormatError(path + ": unsupported PNM magic '" + magic + "' (binary P5/P6 only)");

    long vals[3];
    for (int i = 0; i < 3; ++i) {
        if (pnm_read_token(in, tok) < 0) throw FormatError(path + ": truncated PNM header");
        try { vals[i] = std::stol(tok); } catch (...) { throw FormatError(path + ": bad PNM header token '" + tok + "'"); }
    }
    const long w = vals[0], h = vals[1], maxval = vals[2];
    if (w < 1 || h < 1) throw FormatError(path + ": bad PNM dimensions");
    if (maxval < 1 || maxval > 65535)
        throw FormatError(path + ": unsupported PNM maxval " + std::to_string(maxval));
    const bool wide = maxval > 255;

    Image img(static_cast<int>(w), static_cast<int>(h), channels,
              channels == 1 ? ColorSpace::GrayY : ColorSpace::RGB);
    const size_t npx = img.plane_size();
    const size_t bytes = npx * channels * (wide ? 2 : 1);
    std::vector<unsigned char> buf(bytes);
    in.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(bytes));
    if (static_cast<size_t>(in.gcount()) != bytes) throw FormatError(path + ": truncated PNM pixel data");

    const float scale = 1.0f / static_cast<float>(maxval);
    for (size_t i = 0; i < npx; ++i) {
        for (int c = 0; c < channels; ++c) {
            const size_t k = i * channels + c;   // interleaved in file, planar in memory
            unsigned v = wide ? (static_cast<unsigned>(buf[2 * k]) << 8 | buf[2 * k + 1])
                              : buf[k];
            img.plane(c)[i] = static_cast<float>(v) * scale;
        }
    }
    return img;
}

inline void save_pnm(const Image& img, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open " + path + " for writing");
    const int channels = img.channels;
    out << (channels == 1 ? "P5" : "P6") << "\n" << img.width << " " << img.height << "\n255\n";
    std::vector<unsigned char> row(static_cast<size_t>(img.width) * channels);
    for (int y = 0; y < img.height; ++y) {
        for (int x = 0; x < img.width; ++x)
            for (int c = 0; c < channels; ++c) {
                float v = img.at(c, y, x);
                if (!(v > 0.0f)) v = 0.0f; else if (v > 1.0f) v = 1.0f;
                row[static_cast<size_t>(x) * channels + c] =
                    static_cast<unsigned char>(std::lround(v * 255.0f));
            }
        out.write(reinterpret_cast<const char*>(row.data()), static_cast<std::streamsize>(row.size()));
    }
    if (!out) throw IoError("write failed for " + path);
}

// ---- PNG via libpng ----

inline Image load_png(const std::string& path) {
    FilePtr fp(std::fopen(path.c_str(), "rb"));
    if (!fp) throw IoError("cannot open " + path);

    png_byte header[8];
    if (std::fread(header, 1, 8, fp.get()) != 8 || png_sig_cmp(header, 0, 8) != 0)
        throw FormatError(path + ": not a PNG file");

    png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    if (!png) throw Error("libpng: out of memory");
    png_infop info = png_create_info_struct(png);
    if (!info) {
        png_destroy_read_struct(&png, nullptr, nullptr);
        throw Error("libpng: out of memory");
    }
    std::vector<png_bytep> rows;
    std::vector<unsigned char> pixels;
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw FormatError(path + ": corrupt PNG data");
    }
    png_init_io(png, fp.get());
    png_set_sig_bytes(png, 8);
    png_read_info(png, info);

    const png_uint_32 w = png_get_image_width(png, info);
    const png_uint_32 h = png_get_image_height(png, info);
    const int bit_depth = png_get_bit_depth(png, info);
    const int color_type = png_get_color_type(png, info);

    // Normalize to 8/16-bit gray or RGB without alpha.
    if (color_type == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
    if (color_type == PNG_COLOR_TYPE_GRAY && bit_depth < 8) png_set_expand_gray_1_2_4_to_8(png);
    if (png_get_valid(png, info, PNG_INFO_tRNS)) png_set_tRNS_to_alpha(png);
    if (color_type & PNG_COLOR_MASK_ALPHA) png_set_strip_alpha(png);
    if (bit_depth == 16) png_set_swap(png);   // little-endian reads below
    png_set_interlace_handling(png);
    png_read_update_info(png, info);

    const int out_channels = static_cast<int>(png_get_channels(png, info));
    const int out_depth = png_get_bit_depth(png, info);
    if (out_channels != 1 && out_channels != 3) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw FormatError(path + ": unsupported PNG channel layout");
    }

    const size_t rowbytes = png_get_rowbytes(png, info);
    pixels.resize(rowbytes * h);
    rows.resize(h);
    for (png_uint_32 y = 0; y < h; ++y) rows[y] = pixels.data() + y * rowbytes;
    png_read_image(png, rows.data());
    png_read_end(png, nullptr);
    png_destroy_read_struct(&png, &info, nullptr);

    Image img(static_cast<int>(w), static_cast<int>(h), out_channels,
              out_channels == 1 ? ColorSpace::GrayY : ColorSpace::RGB);
    const float scale = out_depth == 16 ? 1.0f / 65535.0f : 1.0f / 255.0f;
    for (png_uint_32 y = 0; y < h; ++y) {
        const unsigned char* row = pixels.data() + y * rowbytes;
        for (png_uint_32 x = 0; x < w; ++x)
            for (int c = 0; c < out_channels; ++c) {
                const size_t k = (static_cast<size_t>(x) * out_channels + c);
                unsigned v = out_depth == 16
                                 ? (static_cast<unsigned>(row[2 * k + 1]) << 8 | row[2 * k])
                                 : row[k];
                img.at(c, static_cast<int>(y), static_cast<int>(x)) = static_cast<float>(v) * scale;
            }
    }
    return img;
}

inline void save_png(const Image& img, const std::string& path) {
    FilePtr fp(std::fopen(path.c_str(), "wb"));
    if (!fp) throw IoError("cannot open " + path + " for writing");

    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    if (!png) throw Error("libpng: out of memory");
    png_infop info = png_create_info_struct(png);
    if (!info) {
        png_destroy_write_struct(&png, nullptr);
        throw Error("libpng: out of memory");
    }
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_write_struct(&png, &info);
        throw IoError("write failed for " + path);
    }
    png_init_io(png, fp.get());
    png_set_IHDR(png, info, static_cast<png_uint_32>(img.width), static_cast<png_uint_32>(img.height),
                 8, img.channels == 1 ? PNG_COLOR_TYPE_GRAY : PNG_COLOR_TYPE_RGB,
                 PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);

    std::vector<unsigned char> row(static_cast<size_t>(img.width) * img.channels);
    for (int y = 0; y < img.height; ++y) {
        for (int x = 0; x < img.width; ++x)
            for (int c = 0; c < img.channels; ++c) {
                float v = img.at(c, y, x);
                if (!(v > 0.0f)) v = 0.0f; else if (v > 1.0f) v = 1.0f;
                row[static_cast<size_t>(x) * img.channels + c] =
                    static_cast<unsigned char>(std::lround(v * 255.0f));
            }
        png_write_row(png, row.data());
    }
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);
}

} // namespace detail

/// Load a PNG or binary PGM/PPM file. Dispatches on file magic, not
/// extension. Samples are normalized to [0,1]; 1-channel files become
/// GrayY, 3-channel become RGB.
inline Image load_image(const std::string& path) {
    std::ifstream probe(path, std::ios::binary);
    if (!probe) throw IoError("cannot open " + path);
    char magic[2] = {0, 0};
    probe.read(magic, 2);
    probe.close();
    if (static_cast<unsigned char>(magic[0]) == 0x89 && magic[1] == 'P') return detail::load_png(path);
    if (magic[0] == 'P' && (magic[1] == '5' || magic[1] == '6')) return detail::load_pnm(path);
    throw FormatError(path + ": unrecognized image format (PNG or binary PGM/PPM expected)");
}

/// Save as 8-bit PNG (.png) or binary PGM/PPM (any other extension).
/// A loaded round trip stays within 1/255 of the original samples.
inline void save_image(const Image& img, const std::string& path) {
    if (detail::ends_with_ci(path, ".png")) detail::save_png(img, path);
    else detail::save_pnm(img, path);
}

} // namespace esisr
