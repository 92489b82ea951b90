#include "steglab/image_io.hpp"

#include <png.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <memory>
#include <sstream>

namespace steglab {

namespace {

struct FileCloser {
    void operator()(std::FILE* f) const {
        if (f) std::fclose(f);
    }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

bool has_suffix(const std::string& s, const std::string& suffix) {
    if (s.size() < suffix.size()) return false;
    std::string tail = s.substr(s.size() - suffix.size());
    std::transform(tail.begin(), tail.end(), tail.begin(), ::tolower);
    return tail == suffix;
}

// PPM: skips whitespace and '#' comments between header tokens.
int next_ppm_token(std::istream& in) {
    int c = in.get();
    while (c == '#' || std::isspace(c)) {
        if (c == '#') {
            while (c != '\n' && c != EOF) c = in.get();
        }
        c = in.get();
    }
    if (c == EOF) throw std::runtime_error("ppm: truncated header");
    in.unget();
    int value = 0;
    in >> value;
    if (!in) throw std::runtime_error("ppm: malformed header token");
    return value;
}

}  // namespace

ByteImage read_ppm(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path);
    char magic[2] = {0, 0};
    in.read(magic, 2);
    if (magic[0] != 'P' || magic[1] != '6')
        throw std::runtime_error(path + ": not a binary PPM (P6)");
    int w = next_ppm_token(in);
    int h = next_ppm_token(in);
    int maxval = next_ppm_token(in);
    if (w <= 0 || h <= 0) throw std::runtime_error(path + ": bad PPM dimensions");
    if (maxval != 255) throw std::runtime_error(path + ": only maxval 255 PPM supported");
    in.get();  // single whitespace after maxval
    ByteImage img(h, w);
    in.read(reinterpret_cast<char*>(img.data.data()), static_cast<std::streamsize>(img.size()));
    if (in.gcount() != static_cast<std::streamsize>(img.size()))
        throw std::runtime_error(path + ": truncated PPM pixel data");
    return img;
}

void write_ppm(const std::string& path, const ByteImage& img) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << "P6\n" << img.w << " " << img.h << "\n255\n";
    out.write(reinterpret_cast<const char*>(img.data.data()),
              static_cast<std::streamsize>(img.size()));
    if (!out) throw std::runtime_error("write failed for " + path);
}

ByteImage read_png(const std::string& path) {
    FilePtr fp(std::fopen(path.c_str(), "rb"));
    if (!fp) throw std::runtime_error("cannot open " + path);
    png_byte header[8];
    if (std::fread(header, 1, 8, fp.get()) != 8 || png_sig_cmp(header, 0, 8))
        throw std::runtime_error(path + ": not a PNG file");

    png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    if (!png) throw std::runtime_error("png: allocation failure");
    png_infop info = png_create_info_struct(png);
    if (!info) {
        png_destroy_read_struct(&png, nullptr, nullptr);
        throw std::runtime_error("png: allocation failure");
    }
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw std::runtime_error(path + ": PNG decode error");
    }
    png_init_io(png, fp.get());
    png_set_sig_bytes(png, 8);
    png_read_info(png, info);

    png_uint_32 w = png_get_image_width(png, info);
    png_uint_32 h = png_get_image_height(png, info);
    int color = png_get_color_type(png, info);
    int depth = png_get_bit_depth(png, info);

    // Normalize everything to 8-bit RGB.
    if (depth == 16) png_set_strip_16(png);
    if (color == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
    if (color == PNG_COLOR_TYPE_GRAY && depth < 8) png_set_expand_gray_1_2_4_to_8(png);
    if (png_get_valid(png, info, PNG_INFO_tRNS)) png_set_tRNS_to_alpha(png);
    if (color == PNG_COLOR_TYPE_GRAY || color == PNG_COLOR_TYPE_GRAY_ALPHA)
        png_set_gray_to_rgb(png);
    png_set_strip_alpha(png);
    png_read_update_info(png, info);

    if (png_get_rowbytes(png, info) != w * 3) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw std::runtime_error(path + ": unexpected PNG row layout");
    }
    ByteImage img(static_cast<int>(h), static_cast<int>(w));
    std::vector<png_bytep> rows(h);
    for (png_uint_32 y = 0; y < h; ++y) rows[y] = img.data.data() + static_cast<size_t>(y) * w * 3;
    png_read_image(png, rows.data());
    png_read_end(png, nullptr);
    png_destroy_read_struct(&png, &info, nullptr);
    return img;
}

void write_png(const std::string& path, const ByteImage& img) {
    FilePtr fp(std::fopen(path.c_str(), "wb"));
    if (!fp) throw std::runtime_error("cannot write " + path);
    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    if (!png) throw std::runtime_error("png: allocation failure");
    png_infop info = png_create_info_struct(png);
    if (!info) {
        png_destroy_write_struct(&png, nullptr);
        throw std::runtime_error("png: allocation failure");
    }
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_write_struct(&png, &info);
        throw std::runtime_error(path + ": PNG encode error");
    }
    png_init_io(png, fp.get());
    png_set_IHDR(png, info, img.w, img.h, 8, PNG_COLOR_TYPE_RGB, PNG_INTERLACE_NONE,
                 PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);
    std::vector<png_const_bytep> rows(img.h);
    for (int y = 0; y < img.h; ++y) rows[y] = img.data.data() + static_cast<size_t>(y) * img.w * 3;
    png_write_image(png, const_cast<png_bytepp>(rows.data()));
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);
}

ByteImage read_image(const std::string& path) {
    std::ifstream probe(path, std::ios::binary);
    if (!probe) throw std::runtime_error("cannot open " + path);
    char first = 0;
    probe.get(first);
    probe.close();
    if (first == 'P') return read_ppm(path);
    return read_png(path);
}

void write_image(const std::string& path, const ByteImage& img) {
    if (has_suffix(path, ".ppm")) {
        write_ppm(path, img);
    } else if (has_suffix(path, ".png")) {
        write_png(path, img);
    } else {
        throw std::runtime_error(path + ": unsupported image extension (use .png or .ppm)");
    }
}

ByteImage crop_resize(const ByteImage& img, int size) {
    if (size <= 0) throw std::invalid_argument("crop_resize: size must be positive");
    int side = std::min(img.h, img.w);
    int y0 = (img.h - side) / 2;
    int x0 = (img.w - side) / 2;
    ByteImage out(size, size);
    // Bilinear sampling at pixel centers over the centered square crop.
    double scale = static_cast<double>(side) / size;
    for (int y = 0; y < size; ++y) {
        double sy = (y + 0.5) * scale - 0.5;
        sy = std::clamp(sy, 0.0, static_cast<double>(side - 1));
        int iy = static_cast<int>(sy);
        int iy1 = std::min(iy + 1, side - 1);
        double fy = sy - iy;
        for (int x = 0; x < size; ++x) {
            double sx = (x + 0.5) * scale - 0.5;
            sx = std::clamp(sx, 0.0, static_cast<double>(side - 1));
            int ix = static_cast<int>(sx);
            int ix1 = std::min(ix + 1, side - 1);
            double fx = sx - ix;
            for (int c = 0; c < 3; ++c) {
                double top = img.at(y0 + iy, x0 + ix, c) * (1 - fx) + img.at(y0 + iy, x0 + ix1, c) * fx;
                double bot = img.at(y0 + iy1, x0 + ix, c) * (1 - fx) + img.at(y0 + iy1, x0 + ix1, c) * fx;
                double v = top * (1 - fy) + bot * fy;
                out.at(y, x, c) = static_cast<uint8_t>(std::lround(std::clamp(v, 0.0, 255.0)));
            }
        }
    }
    return out;
}

}  // namespace steglab
