#include <csetjmp>
#include <cstdio>
#include <memory>

#include <png.h>

#include "ddcrp/image.hpp"
#include "png_io.hpp"

namespace ddcrp {
namespace {

struct FileCloser {
  void operator()(std::FILE* f) const {
    if (f) std::fclose(f);
  }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

// Row storage lives in the caller's frame so that a longjmp out of libpng
// never skips a destructor.
struct GrayReadState {
  std::vector<png_byte> buffer;
  std::vector<png_bytep> rows;
};

bool read_gray_impl(std::FILE* fp, GrayImage16& out, GrayReadState& state, std::string& error) {
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (!png) {
    error = "libpng init failed";
    return false;
  }
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_read_struct(&png, nullptr, nullptr);
    error = "libpng init failed";
    return false;
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    error = "unreadable file";
    return false;
  }
  png_init_io(png, fp);
  png_read_info(png, info);
  const png_uint_32 w = png_get_image_width(png, info);
  const png_uint_32 h = png_get_image_height(png, info);
  const int depth = png_get_bit_depth(png, info);
  const int color = png_get_color_type(png, info);
  if (color != PNG_COLOR_TYPE_GRAY || (depth != 8 && depth != 16)) {
    png_destroy_read_struct(&png, &info, nullptr);
    error = "unsupported format (expected 8- or 16-bit grayscale PNG)";
    return false;
  }
  const size_t stride = png_get_rowbytes(png, info);
  state.buffer.assign(stride * h, 0);
  state.rows.resize(h);
  for (png_uint_32 y = 0; y < h; ++y) state.rows[y] = state.buffer.data() + y * stride;
  png_read_image(png, state.rows.data());
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);

  out.width = static_cast<int>(w);
  out.height = static_cast<int>(h);
  out.values.assign(static_cast<size_t>(w) * h, 0);
  for (png_uint_32 y = 0; y < h; ++y) {
    for (png_uint_32 x = 0; x < w; ++x) {
      const png_byte* row = state.rows[y];
      out.values[static_cast<size_t>(y) * w + x] =
          depth == 16 ? static_cast<std::uint16_t>((row[2 * x] << 8) | row[2 * x + 1]) : row[x];
    }
  }
  return true;
}

}  // namespace

ImageRGB read_png_rgb(const std::filesystem::path& path) {
  png_image image{};
  image.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_file(&image, path.string().c_str())) {
    throw IoError("unreadable file: " + path.string() + " (" + image.message + ")");
  }
  image.format = PNG_FORMAT_RGBA;
  if (image.width == 0 || image.height == 0) {
    png_image_free(&image);
    throw IoError("zero-dimension image: " + path.string());
  }
  std::vector<png_byte> buffer(PNG_IMAGE_SIZE(image));
  if (!png_image_finish_read(&image, nullptr, buffer.data(), 0, nullptr)) {
    const std::string msg = image.message;
    png_image_free(&image);
    throw IoError("unreadable file: " + path.string() + " (" + msg + ")");
  }
  ImageRGB out(static_cast<int>(image.width), static_cast<int>(image.height));
  for (size_t i = 0; i < out.pixels.size(); ++i) {
    for (int c = 0; c < 3; ++c) out.pixels[i][c] = buffer[4 * i + c] / 255.0;
  }
  return out;
}

GrayImage16 read_png_gray16(const std::filesystem::path& path) {
  FilePtr fp(std::fopen(path.string().c_str(), "rb"));
  if (!fp) throw IoError("unreadable file: " + path.string());
  png_byte sig[8];
  if (std::fread(sig, 1, 8, fp.get()) != 8 || png_sig_cmp(sig, 0, 8) != 0) {
    throw IoError("unsupported format: " + path.string() + " is not a PNG");
  }
  std::rewind(fp.get());
  GrayImage16 out;
  GrayReadState state;
  std::string error;
  if (!read_gray_impl(fp.get(), out, state, error)) throw IoError(error + ": " + path.string());
  if (out.width == 0 || out.height == 0) throw IoError("zero-dimension image: " + path.string());
  return out;
}

void write_png_gray16(const GrayImage16& gray, const std::filesystem::path& path) {
  png_image image{};
  image.version = PNG_IMAGE_VERSION;
  image.width = static_cast<png_uint_32>(gray.width);
  image.height = static_cast<png_uint_32>(gray.height);
  image.format = PNG_FORMAT_LINEAR_Y;
  if (!png_image_write_to_file(&image, path.string().c_str(), 0, gray.values.data(), 0, nullptr)) {
    throw IoError("cannot write " + path.string() + " (" + image.message + ")");
  }
}

}  // namespace ddcrp
