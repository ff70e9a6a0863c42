#include <png.h>

#include <algorithm>
#include <bit>
#include <cctype>
#include <cmath>
#include <csetjmp>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <iterator>
#include <memory>
#include <string>

#include "json.hpp"
#include "sitedev/error.hpp"
#include "sitedev/raster.hpp"

namespace sitedev {

namespace {

using nlohmann::json;

constexpr int kContainerVersion = 1;

std::vector<std::byte> read_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Io, "cannot open " + path.string());
  std::vector<char> raw((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  std::vector<std::byte> out(raw.size());
  std::memcpy(out.data(), raw.data(), raw.size());
  return out;
}

void write_bytes(const std::filesystem::path& path, std::span<const std::byte> bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::Io, "cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(ErrorKind::Io, "write failed for " + path.string());
}

std::uint32_t to_little_endian(std::uint32_t v) {
  if constexpr (std::endian::native == std::endian::big)
    v = (v >> 24) | ((v >> 8) & 0xff00u) | ((v << 8) & 0xff0000u) | (v << 24);
  return v;
}

template <typename T>
T header_field(const json& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end()) throw Error(ErrorKind::Load, std::string("header field '") + key + "' missing");
  try {
    return it->get<T>();
  } catch (const json::exception&) {
    throw Error(ErrorKind::Load, std::string("header field '") + key + "' has the wrong type");
  }
}

}  // namespace

std::vector<std::byte> encode_raster(const RasterGrid& grid) {
  const auto& m = grid.meta();
  const auto& t = m.transform;
  json header = {
      {"schema_version", kContainerVersion},
      {"height", grid.height()},
      {"width", grid.width()},
      {"band_kind", to_string(m.band_kind)},
      {"bit_depth", m.bit_depth},
      {"acquired", m.acquired.to_string()},
      {"transform",
       {{"origin_lon", t.origin_lon},
        {"origin_lat", t.origin_lat},
        {"pixel_size_x_m", t.pixel_size_x_m},
        {"pixel_size_y_m", t.pixel_size_y_m},
        {"crs", to_string(t.crs)},
        {"anchor_lat", t.anchor_lat}}},
  };
  if (m.period) header["period"] = m.period->to_string();
  const std::string text = header.dump() + '\n';

  std::vector<std::byte> out(text.size() + grid.size() * 4);
  std::memcpy(out.data(), text.data(), text.size());
  std::byte* p = out.data() + text.size();
  for (double v : grid.values()) {
    const std::uint32_t bits = to_little_endian(std::bit_cast<std::uint32_t>(static_cast<float>(v)));
    std::memcpy(p, &bits, 4);
    p += 4;
  }
  return out;
}

RasterGrid decode_raster(std::span<const std::byte> bytes) {
  const auto* begin = reinterpret_cast<const char*>(bytes.data());
  const auto* nl = static_cast<const char*>(std::memchr(begin, '\n', bytes.size()));
  if (nl == nullptr) throw Error(ErrorKind::Load, "header line not terminated");
  json h;
  try {
    h = json::parse(begin, nl);
  } catch (const json::exception& e) {
    throw Error(ErrorKind::Load, std::string("header is not valid JSON: ") + e.what());
  }
  if (!h.is_object()) throw Error(ErrorKind::Load, "header is not a JSON object");
  if (auto v = header_field<int>(h, "schema_version"); v != kContainerVersion)
    throw Error(ErrorKind::Load, "header field 'schema_version' unsupported: " + std::to_string(v));

  const auto height = header_field<std::int64_t>(h, "height");
  const auto width = header_field<std::int64_t>(h, "width");
  if (height < 1) throw Error(ErrorKind::Load, "header field 'height' must be >= 1");
  if (width < 1) throw Error(ErrorKind::Load, "header field 'width' must be >= 1");

  RasterGrid::Meta meta;
  meta.band_kind = parse_band_kind(header_field<std::string>(h, "band_kind"));
  meta.bit_depth = header_field<int>(h, "bit_depth");
  meta.acquired = Date::parse(header_field<std::string>(h, "acquired"));
  if (h.contains("period")) meta.period = YearMonth::parse(header_field<std::string>(h, "period"));
  const json t = header_field<json>(h, "transform");
  meta.transform.origin_lon = header_field<double>(t, "origin_lon");
  meta.transform.origin_lat = header_field<double>(t, "origin_lat");
  meta.transform.pixel_size_x_m = header_field<double>(t, "pixel_size_x_m");
  meta.transform.pixel_size_y_m = header_field<double>(t, "pixel_size_y_m");
  meta.transform.crs = parse_crs_tag(header_field<std::string>(t, "crs"));
  meta.transform.anchor_lat = header_field<double>(t, "anchor_lat");

  const std::size_t n = static_cast<std::size_t>(height) * static_cast<std::size_t>(width);
  const std::size_t payload = bytes.size() - static_cast<std::size_t>(nl - begin) - 1;
  if (payload != n * 4)
    throw Error(ErrorKind::Load, "payload length: header declares " + std::to_string(n) +
                                     " samples but payload holds " + std::to_string(payload) +
                                     " bytes");
  std::vector<double> values(n);
  const char* p = nl + 1;
  for (std::size_t i = 0; i < n; ++i, p += 4) {
    std::uint32_t bits;
    std::memcpy(&bits, p, 4);
    const float f = std::bit_cast<float>(to_little_endian(bits));
    if (!std::isfinite(f))
      throw Error(ErrorKind::Load, "sample " + std::to_string(i) + " is not finite");
    values[i] = f;
  }
  try {
    return RasterGrid(static_cast<std::size_t>(height), static_cast<std::size_t>(width),
                      std::move(values), std::move(meta));
  } catch (const Error& e) {
    throw Error(ErrorKind::Load, e.what());
  }
}

RasterGrid load_raster(const std::filesystem::path& path) {
  try {
    return decode_raster(read_bytes(path));
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::Io) throw;
    throw Error(e.kind(), path.string() + ": " + e.what());
  }
}

void save_raster(const RasterGrid& grid, const std::filesystem::path& path) {
  write_bytes(path, encode_raster(grid));
}

// ---------------------------------------------------------------------------
// Netpbm

namespace {

struct NetpbmReader {
  const std::vector<std::byte>& data;
  std::size_t pos = 0;
  std::string name;

  int peek() const { return pos < data.size() ? static_cast<int>(data[pos]) : -1; }

  void skip_space_and_comments() {
    for (;;) {
      const int c = peek();
      if (c == '#') {
        while (peek() != -1 && peek() != '\n') ++pos;
      } else if (c != -1 && std::isspace(c)) {
        ++pos;
      } else {
        return;
      }
    }
  }

  long number(const char* field) {
    skip_space_and_comments();
    long v = 0;
    bool any = false;
    while (peek() != -1 && std::isdigit(peek())) {
      v = v * 10 + (peek() - '0');
      ++pos;
      any = true;
      if (v > 1'000'000'000) break;
    }
    if (!any) throw Error(ErrorKind::Load, name + ": invalid " + field);
    return v;
  }
};

ImportedImage import_netpbm(const std::filesystem::path& path, const RasterGrid::Meta& meta,
                            bool color) {
  const auto data = read_bytes(path);
  NetpbmReader rd{data, 0, path.string()};
  if (data.size() < 2 || static_cast<char>(data[0]) != 'P')
    throw Error(ErrorKind::Load, rd.name + ": missing netpbm magic");
  const char kind = static_cast<char>(data[1]);
  const bool binary = kind == '5' || kind == '6';
  const bool is_color = kind == '3' || kind == '6';
  if (is_color != color || !(kind == '2' || kind == '3' || kind == '5' || kind == '6'))
    throw Error(ErrorKind::Load, rd.name + ": unsupported netpbm variant P" + kind);
  rd.pos = 2;
  const long width = rd.number("width");
  const long height = rd.number("height");
  const long maxval = rd.number("maxval");
  if (width < 1 || height < 1) throw Error(ErrorKind::Load, rd.name + ": empty image");
  if (maxval < 1 || maxval > 65535) throw Error(ErrorKind::Load, rd.name + ": invalid maxval");
  const int channels = color ? 3 : 1;
  const std::size_t n = static_cast<std::size_t>(width) * static_cast<std::size_t>(height);
  std::vector<std::vector<double>> planes(channels, std::vector<double>(n));

  if (binary) {
    ++rd.pos;  // single whitespace after maxval
    const std::size_t bytes_per = maxval > 255 ? 2 : 1;
    if (data.size() - rd.pos < n * channels * bytes_per)
      throw Error(ErrorKind::Load, rd.name + ": payload length too short");
    for (std::size_t i = 0; i < n; ++i)
      for (int c = 0; c < channels; ++c) {
        unsigned v = static_cast<unsigned>(data[rd.pos++]);
        if (bytes_per == 2) v = (v << 8) | static_cast<unsigned>(data[rd.pos++]);
        planes[c][i] = std::min(1.0, static_cast<double>(v) / maxval);
      }
  } else {
    for (std::size_t i = 0; i < n; ++i)
      for (int c = 0; c < channels; ++c)
        planes[c][i] = std::min(1.0, static_cast<double>(rd.number("sample")) / maxval);
  }

  RasterGrid::Meta m = meta;
  m.bit_depth = maxval > 255 ? 16 : 8;
  m.band_kind = color ? BandKind::Rgb : BandKind::Panchromatic;
  ImportedImage out;
  for (auto& plane : planes)
    out.channels.emplace_back(static_cast<std::size_t>(height), static_cast<std::size_t>(width),
                              std::move(plane), m);
  return out;
}

}  // namespace

ImportedImage import_pgm(const std::filesystem::path& path, const RasterGrid::Meta& meta) {
  return import_netpbm(path, meta, false);
}

ImportedImage import_ppm(const std::filesystem::path& path, const RasterGrid::Meta& meta) {
  return import_netpbm(path, meta, true);
}

// ---------------------------------------------------------------------------
// PNG

ImportedImage import_png(const std::filesystem::path& path, const RasterGrid::Meta& meta) {
  std::unique_ptr<FILE, int (*)(FILE*)> fp(std::fopen(path.c_str(), "rb"), &std::fclose);
  if (!fp) throw Error(ErrorKind::Io, "cannot open " + path.string());

  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (png == nullptr) throw Error(ErrorKind::Load, "libpng initialization failed");
  png_infop info = png_create_info_struct(png);
  if (info == nullptr) {
    png_destroy_read_struct(&png, nullptr, nullptr);
    throw Error(ErrorKind::Load, "libpng initialization failed");
  }

  png_uint_32 width = 0, height = 0;
  int depth = 0, color_type = 0;
  std::vector<png_byte> pixels;
  std::vector<png_bytep> rows;

  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw Error(ErrorKind::Load, path.string() + ": corrupt PNG");
  }
  png_init_io(png, fp.get());
  png_read_info(png, info);
  png_get_IHDR(png, info, &width, &height, &depth, &color_type, nullptr, nullptr, nullptr);

  if (color_type == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
  if (color_type == PNG_COLOR_TYPE_GRAY && depth < 8) png_set_expand_gray_1_2_4_to_8(png);
  if (color_type & PNG_COLOR_MASK_ALPHA) png_set_strip_alpha(png);
  if (depth == 16 && std::endian::native == std::endian::little) png_set_swap(png);
  png_read_update_info(png, info);

  const int channels = png_get_channels(png, info);
  const int out_depth = png_get_bit_depth(png, info);
  const std::size_t stride = png_get_rowbytes(png, info);
  pixels.resize(stride * height);
  rows.resize(height);
  for (png_uint_32 y = 0; y < height; ++y) rows[y] = pixels.data() + y * stride;
  png_read_image(png, rows.data());
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);

  if (channels != 1 && channels != 3)
    throw Error(ErrorKind::Load, path.string() + ": unsupported channel count");
  const double maxval = out_depth == 16 ? 65535.0 : 255.0;
  const std::size_t n = static_cast<std::size_t>(width) * height;
  std::vector<std::vector<double>> planes(channels, std::vector<double>(n));
  for (std::size_t y = 0; y < height; ++y)
    for (std::size_t x = 0; x < width; ++x)
      for (int c = 0; c < channels; ++c) {
        const std::size_t k = x * channels + c;
        double v;
        if (out_depth == 16) {
          std::uint16_t s;
          std::memcpy(&s, rows[y] + 2 * k, 2);
          v = s;
        } else {
          v = rows[y][k];
        }
        planes[c][y * width + x] = v / maxval;
      }

  RasterGrid::Meta m = meta;
  m.bit_depth = out_depth == 16 ? 16 : 8;
  m.band_kind = channels == 3 ? BandKind::Rgb : BandKind::Panchromatic;
  ImportedImage out;
  for (auto& plane : planes) out.channels.emplace_back(height, width, std::move(plane), m);
  return out;
}

ImportedImage import_image(const std::filesystem::path& path, const RasterGrid::Meta& meta) {
  std::string ext = path.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  if (ext == ".pgm") return import_pgm(path, meta);
  if (ext == ".ppm") return import_ppm(path, meta);
  if (ext == ".png") return import_png(path, meta);
  if (ext == ".ras") return ImportedImage{{load_raster(path)}};
  throw Error(ErrorKind::Load, path.string() + ": unsupported image extension '" + ext + "'");
}

}  // namespace sitedev
