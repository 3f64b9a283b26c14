#include "pose6d/io.hpp"

#include "json.hpp"
#include <png.h>

#include <bit>
#include <cmath>
#include <csetjmp>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <memory>
#include <sstream>

namespace pose6d {

namespace fs = std::filesystem;

IoError::IoError(Kind kind, std::string path, std::string detail, std::int64_t offset)
    : std::runtime_error(std::string(to_string(kind)) + ": " + path + ": " + detail +
                         (offset >= 0 ? " (at byte " + std::to_string(offset) + ")" : "")),
      kind_(kind),
      path_(std::move(path)),
      offset_(offset) {}

const char* to_string(IoError::Kind kind) {
  switch (kind) {
    case IoError::Kind::MissingFile: return "missing file";
    case IoError::Kind::BadMagic: return "bad magic";
    case IoError::Kind::DimensionMismatch: return "dimension mismatch";
    case IoError::Kind::Truncated: return "truncated";
    case IoError::Kind::Malformed: return "malformed";
    case IoError::Kind::WriteFailed: return "write failed";
  }
  return "io error";
}

std::vector<std::uint8_t> read_file_bytes(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(IoError::Kind::MissingFile, path.string(), "cannot open");
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_file_bytes(const fs::path& path, const std::vector<std::uint8_t>& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError(IoError::Kind::WriteFailed, path.string(), "cannot open for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError(IoError::Kind::WriteFailed, path.string(), "write error");
}

void write_text_file(const fs::path& path, const std::string& text) {
  write_file_bytes(path, std::vector<std::uint8_t>(text.begin(), text.end()));
}

std::string read_text_file(const fs::path& path) {
  const auto b = read_file_bytes(path);
  return {b.begin(), b.end()};
}

// ---------------------------------------------------------------------------

namespace {

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int k = 0; k < 4; ++k) out.push_back(static_cast<std::uint8_t>(v >> (8 * k)));
}

std::uint32_t get_u32(const std::uint8_t* p) {
  return static_cast<std::uint32_t>(p[0]) | static_cast<std::uint32_t>(p[1]) << 8 |
         static_cast<std::uint32_t>(p[2]) << 16 | static_cast<std::uint32_t>(p[3]) << 24;
}

void put_f32(std::vector<std::uint8_t>& out, float f) { put_u32(out, std::bit_cast<std::uint32_t>(f)); }
float get_f32(const std::uint8_t* p) { return std::bit_cast<float>(get_u32(p)); }

constexpr std::size_t kHeader = 8;

}  // namespace

std::size_t dtype_size(DType t) {
  switch (t) {
    case DType::F32: return 4;
    case DType::U8: return 1;
    case DType::U16: return 2;
  }
  throw std::invalid_argument("unknown dtype");
}

std::size_t Tensor::element_count() const {
  std::size_t n = 1;
  for (auto d : dims) n *= d;
  return n;
}

std::vector<std::uint8_t> encode_dten(const Tensor& t) {
  if (t.dims.size() > 255) throw std::invalid_argument("dten: too many dimensions");
  if (t.payload.size() != t.element_count() * dtype_size(t.dtype))
    throw std::invalid_argument("dten: payload size does not match dims");
  std::vector<std::uint8_t> out{'D', 'T', 'E', 'N', 1, static_cast<std::uint8_t>(t.dtype),
                                static_cast<std::uint8_t>(t.dims.size()), 0};
  for (auto d : t.dims) put_u32(out, d);
  out.insert(out.end(), t.payload.begin(), t.payload.end());
  return out;
}

Tensor decode_dten(const std::vector<std::uint8_t>& b, const std::string& path) {
  using K = IoError::Kind;
  if (b.size() < 4) throw IoError(K::Truncated, path, "expected at least 8 header bytes, got " + std::to_string(b.size()), static_cast<std::int64_t>(b.size()));
  if (std::memcmp(b.data(), "DTEN", 4) != 0) throw IoError(K::BadMagic, path, "expected \"DTEN\"", 0);
  if (b.size() < kHeader)
    throw IoError(K::Truncated, path, "expected 8 header bytes, got " + std::to_string(b.size()),
                  static_cast<std::int64_t>(b.size()));
  if (b[4] != 1) throw IoError(K::Malformed, path, "unsupported version " + std::to_string(b[4]), 4);
  if (b[5] > 2) throw IoError(K::Malformed, path, "unknown dtype " + std::to_string(b[5]), 5);
  Tensor t;
  t.dtype = static_cast<DType>(b[5]);
  const std::size_t ndim = b[6];
  const std::size_t dims_end = kHeader + 4 * ndim;
  if (b.size() < dims_end)
    throw IoError(K::Truncated, path,
                  "expected " + std::to_string(dims_end) + " bytes of header and dims, got " + std::to_string(b.size()),
                  static_cast<std::int64_t>(b.size()));
  for (std::size_t k = 0; k < ndim; ++k) t.dims.push_back(get_u32(b.data() + kHeader + 4 * k));
  const std::size_t expected = dims_end + t.element_count() * dtype_size(t.dtype);
  if (b.size() < expected)
    throw IoError(K::Truncated, path,
                  "expected " + std::to_string(expected) + " bytes, got " + std::to_string(b.size()),
                  static_cast<std::int64_t>(b.size()));
  if (b.size() > expected)
    throw IoError(K::Malformed, path,
                  "expected " + std::to_string(expected) + " bytes, got " + std::to_string(b.size()) + " (trailing data)",
                  static_cast<std::int64_t>(expected));
  t.payload.assign(b.begin() + static_cast<std::ptrdiff_t>(dims_end), b.end());
  return t;
}

void write_dten(const fs::path& path, const Tensor& t) { write_file_bytes(path, encode_dten(t)); }

Tensor read_dten(const fs::path& path) { return decode_dten(read_file_bytes(path), path.string()); }

Tensor to_tensor(const RgbXyzMap& map) {
  Tensor t;
  t.dtype = DType::F32;
  t.dims = {static_cast<std::uint32_t>(map.height), static_cast<std::uint32_t>(map.width), 7};
  t.payload.reserve(map.size() * 28);
  for (std::size_t i = 0; i < map.size(); ++i) {
    for (int c = 0; c < 3; ++c) put_f32(t.payload, static_cast<float>(map.rgb[i][c]));
    for (int c = 0; c < 3; ++c) put_f32(t.payload, static_cast<float>(map.xyz[i][c]));
    put_f32(t.payload, map.valid[i] ? 1.0f : 0.0f);
  }
  return t;
}

RgbXyzMap rgbxyz_from_tensor(const Tensor& t, const std::string& path) {
  if (t.dtype != DType::F32 || t.dims.size() != 3 || t.dims[2] != 7)
    throw IoError(IoError::Kind::DimensionMismatch, path, "expected H x W x 7 float32");
  RgbXyzMap m(static_cast<int>(t.dims[1]), static_cast<int>(t.dims[0]));
  const std::uint8_t* p = t.payload.data();
  for (std::size_t i = 0; i < m.size(); ++i, p += 28) {
    if (get_f32(p + 24) == 0.0f) continue;
    m.set(i, Eigen::Vector3d(get_f32(p), get_f32(p + 4), get_f32(p + 8)),
          Eigen::Vector3d(get_f32(p + 12), get_f32(p + 16), get_f32(p + 20)));
  }
  return m;
}

Tensor to_tensor(const FeatureMap& f) {
  Tensor t;
  t.dtype = DType::F32;
  t.dims = {static_cast<std::uint32_t>(f.grid.rows), static_cast<std::uint32_t>(f.grid.cols),
            static_cast<std::uint32_t>(f.channels)};
  t.payload.reserve(f.data.size() * 4);
  for (float x : f.data) put_f32(t.payload, x);
  return t;
}

FeatureMap features_from_tensor(const Tensor& t, int stride, const std::string& path) {
  if (t.dtype != DType::F32 || t.dims.size() != 3)
    throw IoError(IoError::Kind::DimensionMismatch, path, "expected rows x cols x C float32");
  FeatureMap f(PatchGrid{static_cast<int>(t.dims[0]), static_cast<int>(t.dims[1]), stride}, static_cast<int>(t.dims[2]));
  for (std::size_t i = 0; i < f.data.size(); ++i) f.data[i] = get_f32(t.payload.data() + 4 * i);
  f.validate();
  return f;
}

// ---------------------------------------------------------------------------
// PNG

namespace {

struct PngRaw {
  int width = 0, height = 0, bit_depth = 0, channels = 0;
  std::vector<std::uint8_t> data;  // rows packed, 16-bit samples host-endian
};

thread_local char png_message[256];

[[noreturn]] void png_error_handler(png_structp png, png_const_charp msg) {
  std::snprintf(png_message, sizeof png_message, "%s", msg);
  png_longjmp(png, 1);
}

void png_warning_handler(png_structp, png_const_charp) {}

struct FileCloser {
  void operator()(std::FILE* f) const { std::fclose(f); }
};

PngRaw read_png_raw(const fs::path& path) {
  using K = IoError::Kind;
  std::unique_ptr<std::FILE, FileCloser> fp(std::fopen(path.string().c_str(), "rb"));
  if (!fp) throw IoError(K::MissingFile, path.string(), "cannot open");
  unsigned char sig[8] = {};
  const std::size_t got = std::fread(sig, 1, 8, fp.get());
  if (got < 8 || png_sig_cmp(sig, 0, 8) != 0) throw IoError(K::BadMagic, path.string(), "not a PNG file", 0);

  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, png_error_handler, png_warning_handler);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!info) {
    png_destroy_read_struct(&png, nullptr, nullptr);
    throw IoError(K::Malformed, path.string(), "libpng initialization failed");
  }
  auto raw = std::make_unique<PngRaw>();
  std::vector<png_bytep>* rows = new std::vector<png_bytep>();
  if (setjmp(png_jmpbuf(png))) {
    const long pos = std::ftell(fp.get());
    png_destroy_read_struct(&png, &info, nullptr);
    delete rows;
    throw IoError(K::Malformed, path.string(), std::string("corrupt PNG data: ") + png_message, pos);
  }
  png_init_io(png, fp.get());
  png_set_sig_bytes(png, 8);
  png_read_info(png, info);
  const int color = png_get_color_type(png, info);
  const int depth = png_get_bit_depth(png, info);
  if (color == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
  if (color == PNG_COLOR_TYPE_GRAY && depth < 8) png_set_expand_gray_1_2_4_to_8(png);
  if (color & PNG_COLOR_MASK_ALPHA) png_set_strip_alpha(png);
  if (depth == 16 && std::endian::native == std::endian::little) png_set_swap(png);
  png_read_update_info(png, info);
  raw->width = static_cast<int>(png_get_image_width(png, info));
  raw->height = static_cast<int>(png_get_image_height(png, info));
  raw->bit_depth = png_get_bit_depth(png, info);
  raw->channels = png_get_channels(png, info);
  const std::size_t rowbytes = png_get_rowbytes(png, info);
  raw->data.resize(rowbytes * static_cast<std::size_t>(raw->height));
  rows->resize(static_cast<std::size_t>(raw->height));
  for (int r = 0; r < raw->height; ++r) (*rows)[r] = raw->data.data() + rowbytes * static_cast<std::size_t>(r);
  png_read_image(png, rows->data());
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);
  delete rows;
  return std::move(*raw);
}

void write_png_raw(const fs::path& path, int width, int height, int bit_depth, int color_type,
                   const std::vector<std::uint8_t>& data) {
  using K = IoError::Kind;
  std::unique_ptr<std::FILE, FileCloser> fp(std::fopen(path.string().c_str(), "wb"));
  if (!fp) throw IoError(K::WriteFailed, path.string(), "cannot open for writing");
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, png_error_handler, png_warning_handler);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!info) {
    png_destroy_write_struct(&png, nullptr);
    throw IoError(K::WriteFailed, path.string(), "libpng initialization failed");
  }
  const int channels = color_type == PNG_COLOR_TYPE_RGB ? 3 : 1;
  const std::size_t rowbytes = static_cast<std::size_t>(width) * channels * (bit_depth / 8);
  std::vector<png_bytep>* rows = new std::vector<png_bytep>(static_cast<std::size_t>(height));
  for (int r = 0; r < height; ++r)
    (*rows)[r] = const_cast<png_bytep>(data.data() + rowbytes * static_cast<std::size_t>(r));
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    delete rows;
    throw IoError(K::WriteFailed, path.string(), std::string("libpng: ") + png_message);
  }
  png_init_io(png, fp.get());
  png_set_IHDR(png, info, static_cast<png_uint_32>(width), static_cast<png_uint_32>(height), bit_depth, color_type,
               PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  if (bit_depth == 16 && std::endian::native == std::endian::little) png_set_swap(png);
  png_write_image(png, rows->data());
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
  delete rows;
}

}  // namespace

void write_png_rgb(const fs::path& path, const RgbImage& img) {
  std::vector<std::uint8_t> data;
  data.reserve(img.size() * 3);
  for (const auto& p : img.data) data.insert(data.end(), p.begin(), p.end());
  write_png_raw(path, img.width, img.height, 8, PNG_COLOR_TYPE_RGB, data);
}

RgbImage read_png_rgb(const fs::path& path) {
  const PngRaw raw = read_png_raw(path);
  if (raw.bit_depth != 8) throw IoError(IoError::Kind::DimensionMismatch, path.string(), "expected 8-bit color");
  RgbImage img(raw.width, raw.height);
  for (std::size_t i = 0; i < img.size(); ++i) {
    for (int c = 0; c < 3; ++c)
      img.data[i][c] = raw.channels == 3 ? raw.data[3 * i + c] : raw.data[i];
  }
  return img;
}

void write_png_mask(const fs::path& path, const BinaryMask& m) {
  std::vector<std::uint8_t> data(m.size());
  for (std::size_t i = 0; i < m.size(); ++i) data[i] = m.data[i] ? 255 : 0;
  write_png_raw(path, m.width, m.height, 8, PNG_COLOR_TYPE_GRAY, data);
}

BinaryMask read_png_mask(const fs::path& path) {
  const PngRaw raw = read_png_raw(path);
  if (raw.bit_depth != 8 || raw.channels != 1)
    throw IoError(IoError::Kind::DimensionMismatch, path.string(), "expected 8-bit grayscale mask");
  BinaryMask m(raw.width, raw.height);
  for (std::size_t i = 0; i < m.size(); ++i) m.data[i] = raw.data[i] ? 1 : 0;
  return m;
}

void write_png_depth(const fs::path& path, const DepthMap& d, double depth_scale) {
  if (!(depth_scale > 0.0)) throw std::invalid_argument("depth png: depth_scale must be > 0");
  std::vector<std::uint8_t> data(d.size() * 2);
  for (std::size_t i = 0; i < d.size(); ++i) {
    const double units = std::round(d.data[i] / depth_scale);
    if (!(units >= 0.0 && units <= 65535.0))
      throw IoError(IoError::Kind::WriteFailed, path.string(), "depth out of 16-bit range");
    const auto v = static_cast<std::uint16_t>(units);
    std::memcpy(data.data() + 2 * i, &v, 2);
  }
  write_png_raw(path, d.width, d.height, 16, PNG_COLOR_TYPE_GRAY, data);
}

DepthMap read_png_depth(const fs::path& path, double depth_scale) {
  if (!(depth_scale > 0.0)) throw std::invalid_argument("depth png: depth_scale must be > 0");
  const PngRaw raw = read_png_raw(path);
  if (raw.bit_depth != 16 || raw.channels != 1)
    throw IoError(IoError::Kind::DimensionMismatch, path.string(), "expected 16-bit grayscale depth");
  DepthMap d(raw.width, raw.height);
  for (std::size_t i = 0; i < d.size(); ++i) {
    std::uint16_t v;
    std::memcpy(&v, raw.data.data() + 2 * i, 2);
    d.data[i] = v * depth_scale;
  }
  return d;
}

// ---------------------------------------------------------------------------
// PLY

void write_ply(const fs::path& path, const ObjectModel& model) {
  std::ostringstream out;
  out << "ply\nformat ascii 1.0\nelement vertex " << model.size()
      << "\nproperty double x\nproperty double y\nproperty double z\n"
         "property uchar red\nproperty uchar green\nproperty uchar blue\nend_header\n";
  char buf[160];
  for (std::size_t i = 0; i < model.size(); ++i) {
    const auto& p = model.points()[i];
    const auto& c = model.colors()[i];
    std::snprintf(buf, sizeof buf, "%.17g %.17g %.17g %d %d %d\n", p.x(), p.y(), p.z(), c[0], c[1], c[2]);
    out << buf;
  }
  write_text_file(path, out.str());
}

ObjectModel read_ply(const fs::path& path, int id) {
  using K = IoError::Kind;
  const std::string text = read_text_file(path);
  const std::string p = path.string();
  std::size_t pos = 0;
  auto next_line = [&](std::size_t& start) -> std::optional<std::string> {
    if (pos >= text.size()) return std::nullopt;
    start = pos;
    std::size_t end = text.find('\n', pos);
    if (end == std::string::npos) end = text.size();
    std::string line = text.substr(pos, end - pos);
    if (!line.empty() && line.back() == '\r') line.pop_back();
    pos = end + 1;
    return line;
  };
  std::size_t at = 0;
  auto line = next_line(at);
  if (!line || *line != "ply") throw IoError(K::BadMagic, p, "expected \"ply\"", 0);
  line = next_line(at);
  if (!line || *line != "format ascii 1.0") throw IoError(K::Malformed, p, "expected \"format ascii 1.0\"", static_cast<std::int64_t>(at));
  std::size_t vertices = 0;
  bool in_vertex = false, have_vertex = false;
  std::vector<std::string> props;
  for (;;) {
    line = next_line(at);
    if (!line) throw IoError(K::Truncated, p, "missing end_header", static_cast<std::int64_t>(text.size()));
    std::istringstream ls(*line);
    std::string word;
    ls >> word;
    if (word == "end_header") break;
    if (word == "comment" || word == "obj_info" || word.empty()) continue;
    if (word == "element") {
      std::string name;
      long long n = -1;
      ls >> name >> n;
      if (n < 0) throw IoError(K::Malformed, p, "bad element line", static_cast<std::int64_t>(at));
      in_vertex = name == "vertex";
      if (in_vertex) {
        vertices = static_cast<std::size_t>(n);
        have_vertex = true;
      } else if (n != 0) {
        throw IoError(K::Malformed, p, "only vertex elements are supported", static_cast<std::int64_t>(at));
      }
      continue;
    }
    if (word == "property") {
      std::string type, name;
      ls >> type >> name;
      if (in_vertex) props.push_back(name);
      continue;
    }
    throw IoError(K::Malformed, p, "unexpected header line \"" + *line + "\"", static_cast<std::int64_t>(at));
  }
  const std::vector<std::string> expected{"x", "y", "z", "red", "green", "blue"};
  if (!have_vertex || props != expected)
    throw IoError(K::Malformed, p, "expected vertex properties x y z red green blue", static_cast<std::int64_t>(at));
  std::vector<Eigen::Vector3d> pts;
  std::vector<std::array<std::uint8_t, 3>> cols;
  pts.reserve(vertices);
  cols.reserve(vertices);
  for (std::size_t v = 0; v < vertices; ++v) {
    line = next_line(at);
    if (!line)
      throw IoError(K::Truncated, p,
                    "expected " + std::to_string(vertices) + " vertices, got " + std::to_string(v),
                    static_cast<std::int64_t>(text.size()));
    std::istringstream ls(*line);
    double x, y, z;
    int r, g, b;
    if (!(ls >> x >> y >> z >> r >> g >> b) || r < 0 || r > 255 || g < 0 || g > 255 || b < 0 || b > 255)
      throw IoError(K::Malformed, p, "bad vertex line", static_cast<std::int64_t>(at));
    pts.emplace_back(x, y, z);
    cols.push_back({static_cast<std::uint8_t>(r), static_cast<std::uint8_t>(g), static_cast<std::uint8_t>(b)});
  }
  try {
    return ObjectModel::create(id, std::move(pts), std::move(cols));
  } catch (const std::invalid_argument& e) {
    throw IoError(K::Malformed, p, e.what());
  }
}

// ---------------------------------------------------------------------------
// Camera JSON

void write_camera_json(const fs::path& path, const CameraModel& cam) {
  const nlohmann::ordered_json j{{"fx", cam.fx()},         {"fy", cam.fy()},        {"cx", cam.cx()},
                                 {"cy", cam.cy()},         {"width", cam.width()}, {"height", cam.height()},
                                 {"depth_scale", cam.depth_scale()}};
  write_text_file(path, j.dump(2) + "\n");
}

CameraModel read_camera_json(const fs::path& path) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(read_text_file(path));
    return CameraModel(j.at("fx").get<double>(), j.at("fy").get<double>(), j.at("cx").get<double>(),
                       j.at("cy").get<double>(), j.at("width").get<int>(), j.at("height").get<int>(),
                       j.at("depth_scale").get<double>());
  } catch (const nlohmann::json::parse_error& e) {
    throw IoError(IoError::Kind::Malformed, path.string(), e.what(), static_cast<std::int64_t>(e.byte));
  } catch (const nlohmann::json::exception& e) {
    throw IoError(IoError::Kind::Malformed, path.string(), e.what());
  } catch (const std::invalid_argument& e) {
    throw IoError(IoError::Kind::Malformed, path.string(), e.what());
  }
}

// ---------------------------------------------------------------------------
// Result CSV

namespace {
constexpr const char* kCsvHeader = "scene_id,im_id,obj_id,score,R,t,time";

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}
}  // namespace

std::string format_results_csv(const std::vector<ResultRow>& rows) {
  std::string out = std::string(kCsvHeader) + "\n";
  for (const auto& r : rows) {
    const Eigen::Matrix3d m = r.pose.rotation().matrix();
    out += std::to_string(r.scene_id) + "," + std::to_string(r.im_id) + "," + std::to_string(r.obj_id) + "," +
           fmt(r.score) + ",";
    for (int i = 0; i < 3; ++i)
      for (int k = 0; k < 3; ++k) out += fmt(m(i, k)) + (i == 2 && k == 2 ? "," : " ");
    const Eigen::Vector3d t = r.pose.translation() * 1000.0;
    out += fmt(t.x()) + " " + fmt(t.y()) + " " + fmt(t.z()) + "," + fmt(r.time) + "\n";
  }
  return out;
}

std::vector<ResultRow> parse_results_csv(const std::string& text, const std::string& path) {
  using K = IoError::Kind;
  std::vector<ResultRow> rows;
  std::size_t pos = 0;
  bool header = true;
  while (pos < text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string::npos) end = text.size();
    std::string line = text.substr(pos, end - pos);
    const auto at = static_cast<std::int64_t>(pos);
    pos = end + 1;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (header) {
      if (line != kCsvHeader) throw IoError(K::BadMagic, path, "unexpected CSV header", at);
      header = false;
      continue;
    }
    std::vector<std::string> f;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) f.push_back(cell);
    if (f.size() != 7) throw IoError(K::Malformed, path, "expected 7 columns", at);
    try {
      ResultRow r;
      r.scene_id = std::stoi(f[0]);
      r.im_id = std::stoi(f[1]);
      r.obj_id = std::stoi(f[2]);
      r.score = std::stod(f[3]);
      std::istringstream rs(f[4]), ts(f[5]);
      Eigen::Matrix3d m;
      for (int i = 0; i < 3; ++i)
        for (int k = 0; k < 3; ++k)
          if (!(rs >> m(i, k))) throw IoError(K::Malformed, path, "R needs 9 values", at);
      Eigen::Vector3d t;
      for (int i = 0; i < 3; ++i)
        if (!(ts >> t[i])) throw IoError(K::Malformed, path, "t needs 3 values", at);
      r.pose = Pose(Rotation::from_matrix(m), t / 1000.0);
      r.time = std::stod(f[6]);
      rows.push_back(r);
    } catch (const std::logic_error&) {
      throw IoError(K::Malformed, path, "bad numeric field", at);
    }
  }
  if (header) throw IoError(K::Truncated, path, "missing CSV header", 0);
  return rows;
}

void write_results_csv(const fs::path& path, const std::vector<ResultRow>& rows) {
  write_text_file(path, format_results_csv(rows));
}

std::vector<ResultRow> read_results_csv(const fs::path& path) {
  return parse_results_csv(read_text_file(path), path.string());
}

}  // namespace pose6d
