#include "straightkit/image.hpp"

#include <png.h>

#include <cctype>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <memory>

namespace straightkit {

std::vector<uint8_t> to_bytes(const GrayImage& img) {
    std::vector<uint8_t> out(img.size());
    for (size_t i = 0; i < img.size(); ++i) out[i] = quantize8(img.data[i]);
    return out;
}

namespace {

struct FileCloser {
    void operator()(std::FILE* f) const { if (f) std::fclose(f); }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

GrayImage decode_png(std::FILE* fp, const std::string& path) {
    png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    if (!png) throw DataError("png: out of memory");
    png_infop info = png_create_info_struct(png);
    if (!info) {
        png_destroy_read_struct(&png, nullptr, nullptr);
        throw DataError("png: out of memory");
    }
    std::vector<uint8_t> interleaved;
    int width = 0, height = 0, channels = 0;
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw DataError("unreadable PNG file: " + path);
    }
    png_init_io(png, fp);
    png_read_info(png, info);

    // Normalize every input variant to 8-bit interleaved channels.
    png_set_strip_16(png);
    png_set_palette_to_rgb(png);
    png_set_expand_gray_1_2_4_to_8(png);
    if (png_get_valid(png, info, PNG_INFO_tRNS)) png_set_tRNS_to_alpha(png);
    png_read_update_info(png, info);

    width = static_cast<int>(png_get_image_width(png, info));
    height = static_cast<int>(png_get_image_height(png, info));
    channels = static_cast<int>(png_get_channels(png, info));
    if (width <= 0 || height <= 0) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw DataError("empty PNG: " + path);
    }
    interleaved.resize(static_cast<size_t>(width) * height * channels);
    std::vector<png_bytep> rows(height);
    for (int y = 0; y < height; ++y)
        rows[y] = interleaved.data() + static_cast<size_t>(y) * width * channels;
    png_read_image(png, rows.data());
    png_read_end(png, nullptr);
    png_destroy_read_struct(&png, &info, nullptr);

    GrayImage img(width, height);
    // Alpha, when present, is ignored; color channels are averaged.
    int color_ch = (channels == 2 || channels == 4) ? channels - 1 : channels;
    for (size_t i = 0; i < img.size(); ++i) {
        double sum = 0.0;
        for (int c = 0; c < color_ch; ++c) sum += interleaved[i * channels + c];
        img.data[i] = sum / (255.0 * color_ch);
    }
    return img;
}

GrayImage decode_pgm(std::FILE* fp, const std::string& path) {
    std::fseek(fp, 0, SEEK_END);
    long len = std::ftell(fp);
    std::fseek(fp, 0, SEEK_SET);
    std::vector<char> buf(static_cast<size_t>(len));
    if (len <= 0 || std::fread(buf.data(), 1, buf.size(), fp) != buf.size())
        throw DataError("unreadable file: " + path);

    size_t pos = 2;  // past "P5"
    auto next_token = [&]() -> long {
        while (pos < buf.size()) {
            if (std::isspace(static_cast<unsigned char>(buf[pos]))) { ++pos; continue; }
            if (buf[pos] == '#') {
                while (pos < buf.size() && buf[pos] != '\n') ++pos;
                continue;
            }
            break;
        }
        long v = 0;
        bool any = false;
        while (pos < buf.size() && std::isdigit(static_cast<unsigned char>(buf[pos]))) {
            v = v * 10 + (buf[pos] - '0');
            ++pos;
            any = true;
        }
        if (!any) throw DataError("malformed PGM header: " + path);
        return v;
    };
    long w = next_token();
    long h = next_token();
    long maxval = next_token();
    ++pos;  // single whitespace after maxval
    if (w <= 0 || h <= 0 || maxval <= 0 || maxval > 255)
        throw DataError("unsupported PGM header: " + path);
    size_t need = static_cast<size_t>(w) * h;
    if (buf.size() - pos < need) throw DataError("truncated PGM: " + path);

    GrayImage img(static_cast<int>(w), static_cast<int>(h));
    for (size_t i = 0; i < need; ++i)
        img.data[i] = static_cast<uint8_t>(buf[pos + i]) / static_cast<double>(maxval);
    return img;
}

bool has_suffix(const std::string& s, const std::string& suf) {
    return s.size() >= suf.size() && s.compare(s.size() - suf.size(), suf.size(), suf) == 0;
}

}  // namespace

GrayImage load_image(const std::string& path, bool invert_flag, int canvas) {
    FilePtr fp(std::fopen(path.c_str(), "rb"));
    if (!fp) throw DataError("cannot open file: " + path);
    unsigned char magic[2] = {0, 0};
    if (std::fread(magic, 1, 2, fp.get()) != 2) throw DataError("unreadable file: " + path);
    std::fseek(fp.get(), 0, SEEK_SET);

    GrayImage img;
    if (magic[0] == 0x89 && magic[1] == 'P') {
        img = decode_png(fp.get(), path);
    } else if (magic[0] == 'P' && magic[1] == '5') {
        img = decode_pgm(fp.get(), path);
    } else {
        throw DataError("unrecognized image format: " + path);
    }
    if (invert_flag) img = invert(img);
    if (canvas > 0) img = center_on_canvas(img, canvas);
    return img;
}

void save_image(const GrayImage& img, const std::string& path) {
    if (img.width < 1 || img.height < 1 || img.size() != static_cast<size_t>(img.width) * img.height)
        throw DataError("invalid image");
    std::vector<uint8_t> bytes = to_bytes(img);

    if (has_suffix(path, ".pgm")) {
        std::ofstream out(path, std::ios::binary);
        if (!out) throw DataError("cannot write file: " + path);
        out << "P5\n" << img.width << " " << img.height << "\n255\n";
        out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
        if (!out) throw DataError("write failed: " + path);
        return;
    }

    FilePtr fp(std::fopen(path.c_str(), "wb"));
    if (!fp) throw DataError("cannot write file: " + path);
    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    if (!png) throw DataError("png: out of memory");
    png_infop info = png_create_info_struct(png);
    if (!info) {
        png_destroy_write_struct(&png, nullptr);
        throw DataError("png: out of memory");
    }
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_write_struct(&png, &info);
        throw DataError("png write failed: " + path);
    }
    png_init_io(png, fp.get());
    png_set_IHDR(png, info, static_cast<png_uint_32>(img.width), static_cast<png_uint_32>(img.height),
                 8, PNG_COLOR_TYPE_GRAY, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
                 PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);
    for (int y = 0; y < img.height; ++y)
        png_write_row(png, bytes.data() + static_cast<size_t>(y) * img.width);
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);
}

GrayImage invert(const GrayImage& img) {
    GrayImage out = img;
    for (double& v : out.data) v = 1.0 - v;
    return out;
}

GrayImage center_on_canvas(const GrayImage& img, int s) {
    if (img.width > s || img.height > s)
        throw DataError("image larger than canvas: " + std::to_string(img.width) + "x" +
                        std::to_string(img.height) + " > " + std::to_string(s));
    GrayImage out(s, s);
    int oy = (s - img.height) / 2;
    int ox = (s - img.width) / 2;
    for (int y = 0; y < img.height; ++y)
        for (int x = 0; x < img.width; ++x)
            out.at(oy + y, ox + x) = img.at(y, x);
    return out;
}

ModelImage to_model_range(const GrayImage& img) {
    ModelImage m{img.width, img.height, {}};
    m.data.resize(img.size());
    for (size_t i = 0; i < img.size(); ++i) {
        double v = 2.0 * img.data[i] - 1.0;
        m.data[i] = v < -1.0 ? -1.0 : (v > 1.0 ? 1.0 : v);
    }
    return m;
}

GrayImage from_model_range(const ModelImage& m) {
    GrayImage img(m.width, m.height);
    for (size_t i = 0; i < m.data.size(); ++i) {
        double v = 0.5 * m.data[i] + 0.5;
        img.data[i] = v < 0.0 ? 0.0 : (v > 1.0 ? 1.0 : v);
    }
    return img;
}

}  // namespace straightkit
