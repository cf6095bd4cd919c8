#pragma once

#include <filesystem>

#include "ddcrp/image.hpp"

namespace ddcrp {

ImageRGB read_png_rgb(const std::filesystem::path& path);

}  // namespace ddcrp
