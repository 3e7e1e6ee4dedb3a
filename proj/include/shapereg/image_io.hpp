#pragma once

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include <png.h>

#include "shapereg/raster.hpp"

namespace shapereg {

// Grayscale image I/O: PGM (P5, 8/16-bit) and PNG (8/16-bit gray; color reads
// are luma-converted). Intensities are linearly scaled to [0,1] on load and
// back to the stored bit depth on save.

namespace detail {

inline int pnm_next_token(std::istream& in, std::string& tok) {
    tok.clear();
    int c = in.get();
    while (c != EOF) {
        if (c == '#') { // comment to end of line
            while (c != EOF && c != '\n') c = in.get();
        } else if (std::isspace(c)) {
            c = in.get();
        } else {
            break;
        }
    }
    while (c != EOF && !std::isspace(c)) {
        tok.push_back(static_cast<char>(c));
        c = in.get();
    }
    return tok.empty() ? EOF : 0;
}

struct PngReadCtx {
    const std::uint8_t* data;
    std::size_t size;
    std::size_t pos;
};

inline void png_mem_read(png_structp png, png_bytep out, png_size_t len) {
    auto* ctx = static_cast<PngReadCtx*>(png_get_io_ptr(png));
    if (ctx->pos + len > ctx->size) png_error(png, "unexpected end of PNG stream");
    std::memcpy(out, ctx->data + ctx->pos, len);
    ctx->pos += len;
}

inline void png_vec_write(png_structp png, png_bytep data, png_size_t len) {
    auto* out = static_cast<std::vector<std::uint8_t>*>(png_get_io_ptr(png));
    out->insert(out->end(), data, data + len);
}

inline void png_noop_flush(png_structp) {}

inline std::vector<std::uint8_t> read_file_bytes(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("unreadable file: " + path);
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                    std::istreambuf_iterator<char>());
    if (bytes.empty()) throw std::runtime_error("unreadable file (empty): " + path);
    return bytes;
}

} // namespace detail

inline Raster load_pgm(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("unreadable file: " + path);
    std::string tok;
    if (detail::pnm_next_token(in, tok) == EOF || tok != "P5")
        throw std::runtime_error("unreadable file (not a P5 PGM): " + path);
    long w = 0, h = 0, maxval = 0;
    try {
        if (detail::pnm_next_token(in, tok) == EOF) throw std::runtime_error("eof");
        w = std::stol(tok);
        if (detail::pnm_next_token(in, tok) == EOF) throw std::runtime_error("eof");
        h = std::stol(tok);
        if (detail::pnm_next_token(in, tok) == EOF) throw std::runtime_error("eof");
        maxval = std::stol(tok);
    } catch (const std::exception&) {
        throw std::runtime_error("unreadable file (bad PGM header): " + path);
    }
    if (w < 1 || h < 1) throw std::runtime_error("zero-size image: " + path);
    if (maxval < 1 || maxval > 65535)
        throw std::runtime_error("unsupported bit depth (maxval " + std::to_string(maxval) + "): " + path);

    Raster img(static_cast<int>(w), static_cast<int>(h));
    const bool wide = maxval > 255;
    const std::size_t n = img.size();
    std::vector<std::uint8_t> buf(n * (wide ? 2 : 1));
    in.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
    if (static_cast<std::size_t>(in.gcount()) != buf.size())
        throw std::runtime_error("unreadable file (truncated pixel data): " + path);
    const double scale = 1.0 / static_cast<double>(maxval);
    for (std::size_t i = 0; i < n; ++i) {
        const unsigned v = wide ? (static_cast<unsigned>(buf[2 * i]) << 8 | buf[2 * i + 1]) : buf[i];
        img.data[i] = static_cast<double>(v) * scale;
    }
    return img;
}

inline void save_pgm(const std::string& path, const Raster& img, int bit_depth = 8) {
    if (bit_depth != 8 && bit_depth != 16)
        throw std::invalid_argument("save_pgm: bit depth must be 8 or 16");
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write file: " + path);
    const unsigned maxval = bit_depth == 8 ? 255u : 65535u;
    out << "P5\n" << img.width << " " << img.height << "\n" << maxval << "\n";
    for (double v : img.data) {
        const double c = std::clamp(v, 0.0, 1.0);
        const unsigned q = static_cast<unsigned>(std::lround(c * maxval));
        if (bit_depth == 16) out.put(static_cast<char>((q >> 8) & 0xff));
        out.put(static_cast<char>(q & 0xff));
    }
    if (!out) throw std::runtime_error("write failed: " + path);
}

inline Raster load_png(const std::string& path) {
    const auto bytes = detail::read_file_bytes(path);
    if (bytes.size() < 8 || png_sig_cmp(bytes.data(), 0, 8) != 0)
        throw std::runtime_error("unreadable file (not a PNG): " + path);

    png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    if (!png) throw std::runtime_error("libpng init failed");
    png_infop info = png_create_info_struct(png);
    if (!info) {
        png_destroy_read_struct(&png, nullptr, nullptr);
        throw std::runtime_error("libpng init failed");
    }
    std::vector<std::vector<std::uint8_t>> rows;
    detail::PngReadCtx ctx{bytes.data(), bytes.size(), 0};
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw std::runtime_error("unreadable file (corrupt PNG): " + path);
    }
    png_set_read_fn(png, &ctx, detail::png_mem_read);
    png_read_info(png, info);

    const png_uint_32 w = png_get_image_width(png, info);
    const png_uint_32 h = png_get_image_height(png, info);
    int depth = png_get_bit_depth(png, info);
    const int color = png_get_color_type(png, info);

    if (color == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
    if (color == PNG_COLOR_TYPE_GRAY && depth < 8) png_set_expand_gray_1_2_4_to_8(png);
    if (png_get_valid(png, info, PNG_INFO_tRNS)) png_set_tRNS_to_alpha(png);
    if (color & PNG_COLOR_MASK_COLOR || color == PNG_COLOR_TYPE_PALETTE)
        png_set_rgb_to_gray_fixed(png, 1, -1, -1); // Rec.709 luma
    if (color & PNG_COLOR_MASK_ALPHA) png_set_strip_alpha(png);
    png_read_update_info(png, info);
    depth = png_get_bit_depth(png, info);
    if (depth != 8 && depth != 16)
        throw std::runtime_error("unsupported bit depth (" + std::to_string(depth) + "): " + path);
    if (w < 1 || h < 1) throw std::runtime_error("zero-size image: " + path);

    const std::size_t rowbytes = png_get_rowbytes(png, info);
    rows.assign(h, std::vector<std::uint8_t>(rowbytes));
    std::vector<png_bytep> row_ptrs(h);
    for (png_uint_32 y = 0; y < h; ++y) row_ptrs[y] = rows[y].data();
    png_read_image(png, row_ptrs.data());
    png_read_end(png, nullptr);
    png_destroy_read_struct(&png, &info, nullptr);

    Raster img(static_cast<int>(w), static_cast<int>(h));
    const double scale = depth == 8 ? 1.0 / 255.0 : 1.0 / 65535.0;
    for (png_uint_32 y = 0; y < h; ++y) {
        const std::uint8_t* r = rows[y].data();
        for (png_uint_32 x = 0; x < w; ++x) {
            const unsigned v = depth == 8
                                   ? r[x]
                                   : (static_cast<unsigned>(r[2 * x]) << 8 | r[2 * x + 1]);
            img.at(static_cast<int>(x), static_cast<int>(y)) = v * scale;
        }
    }
    return img;
}

inline void save_png(const std::string& path, const Raster& img, int bit_depth = 8) {
    if (bit_depth != 8 && bit_depth != 16)
        throw std::invalid_argument("save_png: bit depth must be 8 or 16");
    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    if (!png) throw std::runtime_error("libpng init failed");
    png_infop info = png_create_info_struct(png);
    if (!info) {
        png_destroy_write_struct(&png, nullptr);
        throw std::runtime_error("libpng init failed");
    }
    std::vector<std::uint8_t> out_bytes;
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_write_struct(&png, &info);
        throw std::runtime_error("PNG encode failed: " + path);
    }
    png_set_write_fn(png, &out_bytes, detail::png_vec_write, detail::png_noop_flush);
    png_set_IHDR(png, info, static_cast<png_uint_32>(img.width),
                 static_cast<png_uint_32>(img.height), bit_depth, PNG_COLOR_TYPE_GRAY,
                 PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);

    const unsigned maxval = bit_depth == 8 ? 255u : 65535u;
    const std::size_t rowbytes = static_cast<std::size_t>(img.width) * (bit_depth / 8);
    std::vector<std::uint8_t> row(rowbytes);
    for (int y = 0; y < img.height; ++y) {
        for (int x = 0; x < img.width; ++x) {
            const double c = std::clamp(img.at(x, y), 0.0, 1.0);
            const unsigned q = static_cast<unsigned>(std::lround(c * maxval));
            if (bit_depth == 8) {
                row[x] = static_cast<std::uint8_t>(q);
            } else {
                row[2 * x] = static_cast<std::uint8_t>(q >> 8);
                row[2 * x + 1] = static_cast<std::uint8_t>(q & 0xff);
            }
        }
        png_write_row(png, row.data());
    }
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);

    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write file: " + path);
    out.write(reinterpret_cast<const char*>(out_bytes.data()),
              static_cast<std::streamsize>(out_bytes.size()));
    if (!out) throw std::runtime_error("write failed: " + path);
}

// 8-bit indexed PNG with an explicit palette; used for label field dumps.
inline void save_indexed_png(const std::string& path, int width, int height,
                             const std::vector<int>& labels,
                             const std::vector<std::array<std::uint8_t, 3>>& palette) {
    if (width < 1 || height < 1) throw std::invalid_argument("save_indexed_png: empty image");
    if (labels.size() != static_cast<std::size_t>(width) * height)
        throw std::invalid_argument("save_indexed_png: label buffer size mismatch");
    if (palette.empty() || palette.size() > 256)
        throw std::invalid_argument("save_indexed_png: palette must have 1..256 entries");

    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    if (!png) throw std::runtime_error("libpng init failed");
    png_infop info = png_create_info_struct(png);
    if (!info) {
        png_destroy_write_struct(&png, nullptr);
        throw std::runtime_error("libpng init failed");
    }
    std::vector<std::uint8_t> out_bytes;
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_write_struct(&png, &info);
        throw std::runtime_error("PNG encode failed: " + path);
    }
    png_set_write_fn(png, &out_bytes, detail::png_vec_write, detail::png_noop_flush);
    png_set_IHDR(png, info, static_cast<png_uint_32>(width), static_cast<png_uint_32>(height), 8,
                 PNG_COLOR_TYPE_PALETTE, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
                 PNG_FILTER_TYPE_DEFAULT);
    std::vector<png_color> plte(palette.size());
    for (std::size_t i = 0; i < palette.size(); ++i)
        plte[i] = png_color{palette[i][0], palette[i][1], palette[i][2]};
    png_set_PLTE(png, info, plte.data(), static_cast<int>(plte.size()));
    png_write_info(png, info);

    std::vector<std::uint8_t> row(static_cast<std::size_t>(width));
    for (int y = 0; y < height; ++y) {
        for (int x = 0; x < width; ++x) {
            int v = labels[static_cast<std::size_t>(y) * width + x];
            v = std::clamp(v, 0, static_cast<int>(palette.size()) - 1);
            row[x] = static_cast<std::uint8_t>(v);
        }
        png_write_row(png, row.data());
    }
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);

    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write file: " + path);
    out.write(reinterpret_cast<const char*>(out_bytes.data()),
              static_cast<std::streamsize>(out_bytes.size()));
    if (!out) throw std::runtime_error("write failed: " + path);
}

inline bool has_suffix(const std::string& s, const std::string& suffix) {
    return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

enum class ImageFormat { PGM, PNG };

inline ImageFormat format_from_path(const std::string& path) {
    std::string lower = path;
    std::transform(lower.begin(), lower.end(), lower.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    if (has_suffix(lower, ".pgm")) return ImageFormat::PGM;
    if (has_suffix(lower, ".png")) return ImageFormat::PNG;
    throw std::runtime_error("unsupported image extension: " + path);
}

inline Raster load_image(const std::string& path) {
    return format_from_path(path) == ImageFormat::PGM ? load_pgm(path) : load_png(path);
}

inline Raster load_image(const std::string& path, ImageFormat fmt) {
    return fmt == ImageFormat::PGM ? load_pgm(path) : load_png(path);
}

inline void save_image(const std::string& path, const Raster& img, int bit_depth = 8) {
    if (format_from_path(path) == ImageFormat::PGM)
        save_pgm(path, img, bit_depth);
    else
        save_png(path, img, bit_depth);
}

} // namespace shapereg
