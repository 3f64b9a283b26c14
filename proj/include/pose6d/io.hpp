#pragma once

#include "pose6d/geom.hpp"
#include "pose6d/image.hpp"
#include "pose6d/matcher.hpp"
#include "pose6d/sampler.hpp"

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

namespace pose6d {

class IoError : public std::runtime_error {
 public:
  enum class Kind { MissingFile, BadMagic, DimensionMismatch, Truncated, Malformed, WriteFailed };

  IoError(Kind kind, std::string path, std::string detail, std::int64_t offset = -1);

  Kind kind() const { return kind_; }
  const std::string& path() const { return path_; }
  /// Byte offset of the failure inside the file, or -1 when not applicable.
  std::int64_t offset() const { return offset_; }

 private:
  Kind kind_;
  std::string path_;
  std::int64_t offset_;
};

const char* to_string(IoError::Kind kind);

// ---------------------------------------------------------------------------
// DTEN tensors: "DTEN", version 1, dtype, ndim, reserved, ndim x uint32 dims,
// row-major little-endian payload.

enum class DType : std::uint8_t { F32 = 0, U8 = 1, U16 = 2 };

std::size_t dtype_size(DType t);

struct Tensor {
  DType dtype = DType::F32;
  std::vector<std::uint32_t> dims;
  std::vector<std::uint8_t> payload;  ///< little-endian element bytes

  std::size_t element_count() const;
  friend bool operator==(const Tensor&, const Tensor&) = default;
};

std::vector<std::uint8_t> encode_dten(const Tensor& t);
/// `path` only labels errors.
Tensor decode_dten(const std::vector<std::uint8_t>& bytes, const std::string& path = "<memory>");
void write_dten(const std::filesystem::path& path, const Tensor& t);
Tensor read_dten(const std::filesystem::path& path);

/// H x W x 7 float32: r, g, b, x, y, z, valid.
Tensor to_tensor(const RgbXyzMap& map);
RgbXyzMap rgbxyz_from_tensor(const Tensor& t, const std::string& path = "<memory>");

/// rows x cols x C float32. The stride is not stored in the tensor.
Tensor to_tensor(const FeatureMap& f);
FeatureMap features_from_tensor(const Tensor& t, int stride, const std::string& path = "<memory>");

// ---------------------------------------------------------------------------
// PNG rasters

void write_png_rgb(const std::filesystem::path& path, const RgbImage& img);
RgbImage read_png_rgb(const std::filesystem::path& path);
/// 8-bit grayscale; nonzero is true on read, 255 is written for true.
void write_png_mask(const std::filesystem::path& path, const BinaryMask& m);
BinaryMask read_png_mask(const std::filesystem::path& path);
/// 16-bit grayscale in units of depth_scale meters. Values are rounded to
/// the nearest unit; depths beyond the 16-bit range throw.
void write_png_depth(const std::filesystem::path& path, const DepthMap& d, double depth_scale);
DepthMap read_png_depth(const std::filesystem::path& path, double depth_scale);

// ---------------------------------------------------------------------------
// Models, cameras, results

/// ASCII PLY with x y z and uchar red green blue per vertex.
void write_ply(const std::filesystem::path& path, const ObjectModel& model);
ObjectModel read_ply(const std::filesystem::path& path, int id);

void write_camera_json(const std::filesystem::path& path, const CameraModel& cam);
CameraModel read_camera_json(const std::filesystem::path& path);

struct ResultRow {
  int scene_id = 0;
  int im_id = 0;
  int obj_id = 0;
  double score = 0.0;
  Pose pose;
  double time = -1.0;
};

/// Columns scene_id,im_id,obj_id,score,R,t,time with R as 9 space-separated
/// row-major values and t in millimeters.
std::string format_results_csv(const std::vector<ResultRow>& rows);
std::vector<ResultRow> parse_results_csv(const std::string& text, const std::string& path = "<memory>");
void write_results_csv(const std::filesystem::path& path, const std::vector<ResultRow>& rows);
std::vector<ResultRow> read_results_csv(const std::filesystem::path& path);

std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path);
void write_file_bytes(const std::filesystem::path& path, const std::vector<std::uint8_t>& bytes);
void write_text_file(const std::filesystem::path& path, const std::string& text);
std::string read_text_file(const std::filesystem::path& path);

}  // namespace pose6d
