#include "splatgen/assets.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <iterator>
#include <numbers>
#include <sstream>
#include <string>

#include "byte_io.hpp"

namespace splatgen {

using detail::ByteReader;
using detail::ByteWriter;

std::vector<std::uint8_t> read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

// --- .splat ------------------------------------------------------------------

namespace {

constexpr std::array<std::uint8_t, 4> kSplatMagic{'S', 'P', 'L', 'C'};
constexpr double kRotRange = std::numbers::sqrt2 / 2.0;  // |non-largest component| bound

std::uint32_t quantize(double x, double lo, double hi, std::uint32_t levels) {
  if (!(hi > lo)) return 0;
  const double t = std::clamp((x - lo) / (hi - lo), 0.0, 1.0);
  return static_cast<std::uint32_t>(std::lround(t * levels));
}

double dequantize(std::uint32_t q, double lo, double hi, std::uint32_t levels) {
  if (!(hi > lo)) return lo;
  return lo + (static_cast<double>(q) / levels) * (hi - lo);
}

std::uint8_t unit_to_byte(double x) {
  return static_cast<std::uint8_t>(std::lround(std::clamp(x, 0.0, 1.0) * 255.0));
}

std::array<double, 4> wxyz(const Eigen::Quaterniond& q) {
  const Eigen::Quaterniond n = q.normalized();
  return {n.w(), n.x(), n.y(), n.z()};
}

void check_exportable(const Gaussian3D& g) {
  if (!g.mean.allFinite() || !g.color.allFinite() || !std::isfinite(g.opacity) ||
      !g.rotation.coeffs().allFinite() || !(g.rotation.norm() > 0.0)) {
    throw std::invalid_argument("export: non-finite Gaussian attribute");
  }
  if (!(g.scale.minCoeff() > 0.0) || !g.scale.allFinite()) {
    throw std::invalid_argument("export: non-positive Gaussian scale");
  }
}

}  // namespace

std::size_t splat_chunk_count(std::size_t gaussians) {
  return (gaussians + kSplatChunkSize - 1) / kSplatChunkSize;
}

std::vector<std::uint8_t> encode_splat(const GaussianScene& scene) {
  if (scene.empty()) throw std::invalid_argument("export_splat: empty scene");
  if (scene.size() > 0xffffffffu) throw std::invalid_argument("export_splat: too many Gaussians");
  const std::size_t n = scene.size();
  const std::size_t chunks = splat_chunk_count(n);

  ByteWriter w;
  w.raw(kSplatMagic);
  w.u32(kSplatVersion);
  w.u32(static_cast<std::uint32_t>(n));
  w.u32(static_cast<std::uint32_t>(chunks));

  for (std::size_t c = 0; c < chunks; ++c) {
    const std::size_t begin = c * kSplatChunkSize;
    const std::size_t end = std::min(n, begin + kSplatChunkSize);

    Eigen::Vector3d pmin = Eigen::Vector3d::Constant(INFINITY);
    Eigen::Vector3d pmax = Eigen::Vector3d::Constant(-INFINITY);
    Eigen::Vector3d smin = pmin;
    Eigen::Vector3d smax = pmax;
    for (std::size_t i = begin; i < end; ++i) {
      const Gaussian3D& g = scene.gaussians[i];
      check_exportable(g);
      const Eigen::Vector3d ls = g.scale.array().log();
      pmin = pmin.cwiseMin(g.mean);
      pmax = pmax.cwiseMax(g.mean);
      smin = smin.cwiseMin(ls);
      smax = smax.cwiseMax(ls);
    }
    // Bounds are stored as float32; quantization uses the stored values and
    // clamps, so dequantized values always lie within the stored bounds.
    const Eigen::Vector3f fpmin = pmin.cast<float>(), fpmax = pmax.cast<float>();
    const Eigen::Vector3f fsmin = smin.cast<float>(), fsmax = smax.cast<float>();

    w.u32(static_cast<std::uint32_t>(end - begin));
    for (const auto* v : {&fpmin, &fpmax, &fsmin, &fsmax}) {
      for (int k = 0; k < 3; ++k) w.f32((*v)[k]);
    }
    for (std::size_t i = begin; i < end; ++i) {
      const Gaussian3D& g = scene.gaussians[i];
      for (int k = 0; k < 3; ++k) {
        w.u16(static_cast<std::uint16_t>(quantize(g.mean[k], fpmin[k], fpmax[k], 65535)));
      }
      for (int k = 0; k < 3; ++k) {
        w.u8(static_cast<std::uint8_t>(
            quantize(std::log(g.scale[k]), fsmin[k], fsmax[k], 255)));
      }
      for (int k = 0; k < 3; ++k) w.u8(unit_to_byte(g.color[k]));
      w.u8(unit_to_byte(g.opacity));

      auto q = wxyz(g.rotation);
      int largest = 0;
      for (int k = 1; k < 4; ++k) {
        if (std::abs(q[k]) > std::abs(q[largest])) largest = k;
      }
      if (q[largest] < 0.0) {
        for (auto& x : q) x = -x;
      }
      w.u8(static_cast<std::uint8_t>(largest));
      for (int k = 0; k < 4; ++k) {
        if (k == largest) continue;
        w.u8(unit_to_byte(0.5 * (q[k] / kRotRange + 1.0)));
      }
    }
  }
  return std::move(w.bytes());
}

GaussianScene decode_splat(std::span<const std::uint8_t> bytes, SplatFileInfo* info) {
  ByteReader r(bytes, "splat");
  const auto magic = r.take(4);
  if (!std::equal(magic.begin(), magic.end(), kSplatMagic.begin())) {
    throw FormatError("splat: bad magic");
  }
  SplatFileInfo meta;
  meta.version = r.u32();
  if (meta.version != kSplatVersion) {
    throw FormatError("splat: unsupported version " + std::to_string(meta.version));
  }
  meta.count = r.u32();
  meta.chunk_count = r.u32();
  if (meta.count == 0) throw FormatError("splat: zero Gaussians declared");
  if (meta.chunk_count != splat_chunk_count(meta.count)) {
    throw FormatError("splat: chunk count " + std::to_string(meta.chunk_count) +
                      " disagrees with Gaussian count " + std::to_string(meta.count));
  }
  const std::size_t expected_size =
      kSplatHeaderBytes + meta.chunk_count * kSplatChunkHeaderBytes +
      static_cast<std::size_t>(meta.count) * kSplatRecordBytes;
  if (bytes.size() < expected_size) {
    throw FormatError("splat: truncated payload (" + std::to_string(bytes.size()) + " of " +
                      std::to_string(expected_size) + " bytes)");
  }
  if (bytes.size() > expected_size) {
    throw FormatError("splat: payload longer than declared counts");
  }

  GaussianScene scene;
  scene.gaussians.reserve(meta.count);
  scene.source.reserve(meta.count);
  std::size_t remaining = meta.count;
  for (std::uint32_t c = 0; c < meta.chunk_count; ++c) {
    const std::uint32_t count = r.u32();
    const std::size_t expected = std::min(remaining, kSplatChunkSize);
    if (count != expected) {
      throw FormatError("splat: chunk " + std::to_string(c) + " declares " +
                        std::to_string(count) + " Gaussians, expected " +
                        std::to_string(expected));
    }
    remaining -= count;
    SplatChunkBounds b;
    for (auto* v : {&b.position_min, &b.position_max, &b.log_scale_min, &b.log_scale_max}) {
      for (int k = 0; k < 3; ++k) (*v)[k] = r.f32();
    }
    for (const auto* v : {&b.position_min, &b.position_max, &b.log_scale_min, &b.log_scale_max}) {
      if (!v->allFinite()) throw FormatError("splat: non-finite chunk bounds");
    }
    if ((b.position_min.array() > b.position_max.array()).any() ||
        (b.log_scale_min.array() > b.log_scale_max.array()).any()) {
      throw FormatError("splat: chunk bounds have min > max");
    }
    meta.chunk_counts.push_back(count);
    meta.bounds.push_back(b);

    for (std::uint32_t i = 0; i < count; ++i) {
      Gaussian3D g;
      for (int k = 0; k < 3; ++k) {
        g.mean[k] = dequantize(r.u16(), b.position_min[k], b.position_max[k], 65535);
      }
      for (int k = 0; k < 3; ++k) {
        g.scale[k] =
            std::exp(dequantize(r.u8(), b.log_scale_min[k], b.log_scale_max[k], 255));
      }
      for (int k = 0; k < 3; ++k) g.color[k] = r.u8() / 255.0;
      g.opacity = r.u8() / 255.0;
      const int largest = r.u8();
      if (largest > 3) throw FormatError("splat: bad rotation component index");
      std::array<double, 4> q{};
      double sum_sq = 0.0;
      for (int k = 0; k < 4; ++k) {
        if (k == largest) continue;
        q[k] = (r.u8() / 255.0 * 2.0 - 1.0) * kRotRange;
        sum_sq += q[k] * q[k];
      }
      q[largest] = std::sqrt(std::max(0.0, 1.0 - sum_sq));
      g.rotation = Eigen::Quaterniond(q[0], q[1], q[2], q[3]).normalized();
      scene.push_back(g);
    }
  }
  r.expect_end();
  if (info) *info = std::move(meta);
  return scene;
}

void export_splat(const GaussianScene& scene, const std::filesystem::path& path) {
  write_file(path, encode_splat(scene));
}

GaussianScene import_splat(const std::filesystem::path& path, SplatFileInfo* info) {
  return decode_splat(read_file(path), info);
}

// --- .ply --------------------------------------------------------------------

namespace {

constexpr std::array<const char*, 14> kPlyProperties{
    "x",     "y",     "z",     "scale_0", "scale_1", "scale_2", "rot_0",
    "rot_1", "rot_2", "rot_3", "opacity", "red",     "green",   "blue"};

}  // namespace

std::vector<std::uint8_t> encode_ply(const GaussianScene& scene) {
  if (scene.empty()) throw std::invalid_argument("export_ply: empty scene");
  std::ostringstream header;
  header << "ply\nformat binary_little_endian 1.0\n"
         << "comment splatgen gaussians; rot_* = (w, x, y, z), scales linear\n"
         << "element vertex " << scene.size() << "\n";
  for (const char* name : kPlyProperties) header << "property float " << name << "\n";
  header << "end_header\n";

  ByteWriter w;
  w.text(header.str());
  for (const auto& g : scene.gaussians) {
    const auto q = wxyz(g.rotation);
    const std::array<double, 14> values{g.mean.x(),  g.mean.y(),  g.mean.z(),  g.scale.x(),
                                        g.scale.y(), g.scale.z(), q[0],        q[1],
                                        q[2],        q[3],        g.opacity,   g.color.x(),
                                        g.color.y(), g.color.z()};
    for (double v : values) w.f32(static_cast<float>(v));
  }
  return std::move(w.bytes());
}

GaussianScene decode_ply(std::span<const std::uint8_t> bytes) {
  const std::string_view text(reinterpret_cast<const char*>(bytes.data()), bytes.size());
  const std::string_view end_marker = "end_header\n";
  const auto end_pos = text.find(end_marker);
  if (text.substr(0, 4) != "ply\n" || end_pos == std::string_view::npos) {
    throw FormatError("ply: missing ply header");
  }
  std::istringstream header{std::string(text.substr(0, end_pos))};
  std::string line;
  std::size_t count = 0;
  bool have_count = false;
  std::size_t prop = 0;
  while (std::getline(header, line)) {
    std::istringstream ls(line);
    std::string word;
    ls >> word;
    if (word == "format") {
      std::string fmt;
      ls >> fmt;
      if (fmt != "binary_little_endian") throw FormatError("ply: unsupported format " + fmt);
    } else if (word == "element") {
      std::string name;
      ls >> name >> count;
      if (name != "vertex" || !ls) throw FormatError("ply: expected a vertex element");
      have_count = true;
    } else if (word == "property") {
      std::string type, name;
      ls >> type >> name;
      if (prop >= kPlyProperties.size() || type != "float" || name != kPlyProperties[prop]) {
        throw FormatError("ply: unexpected property '" + name + "'");
      }
      ++prop;
    }
  }
  if (!have_count || prop != kPlyProperties.size()) {
    throw FormatError("ply: incomplete header");
  }

  ByteReader r(bytes.subspan(end_pos + end_marker.size()), "ply");
  GaussianScene scene;
  for (std::size_t i = 0; i < count; ++i) {
    std::array<double, 14> v{};
    for (auto& x : v) x = r.f32();
    Gaussian3D g;
    g.mean = {v[0], v[1], v[2]};
    g.scale = {v[3], v[4], v[5]};
    g.rotation = Eigen::Quaterniond(v[6], v[7], v[8], v[9]);
    g.opacity = v[10];
    g.color = {v[11], v[12], v[13]};
    scene.push_back(g);
  }
  r.expect_end();
  return scene;
}

void export_ply(const GaussianScene& scene, const std::filesystem::path& path) {
  write_file(path, encode_ply(scene));
}

GaussianScene import_ply(const std::filesystem::path& path) {
  return decode_ply(read_file(path));
}

// --- .pointmap ---------------------------------------------------------------

namespace {

constexpr std::array<std::uint8_t, 4> kPointmapMagic{'P', 'M', 'A', 'P'};

}  // namespace

std::vector<std::uint8_t> encode_pointmap(const Pointmap& pointmap) {
  const std::size_t n = pointmap.points.size();
  ByteWriter w;
  w.raw(kPointmapMagic);
  w.u32(static_cast<std::uint32_t>(pointmap.height()));
  w.u32(static_cast<std::uint32_t>(pointmap.width()));
  std::vector<std::uint8_t> bitmap((n + 7) / 8, 0);
  for (std::size_t i = 0; i < n; ++i) {
    if (pointmap.valid[i]) bitmap[i / 8] |= static_cast<std::uint8_t>(1u << (i % 8));
  }
  w.raw(bitmap);
  for (std::size_t i = 0; i < n; ++i) {
    const Vec3& p = pointmap.points[i];
    if (!p.allFinite()) throw std::invalid_argument("write_pointmap: non-finite point");
    for (int k = 0; k < 3; ++k) w.f32(static_cast<float>(p[k]));
  }
  return std::move(w.bytes());
}

Pointmap decode_pointmap(std::span<const std::uint8_t> bytes) {
  ByteReader r(bytes, "pointmap");
  const auto magic = r.take(4);
  if (!std::equal(magic.begin(), magic.end(), kPointmapMagic.begin())) {
    throw FormatError("pointmap: bad magic");
  }
  const std::uint32_t h = r.u32();
  const std::uint32_t w = r.u32();
  if (h > 1u << 16 || w > 1u << 16) throw FormatError("pointmap: implausible dimensions");
  const std::size_t n = static_cast<std::size_t>(h) * w;
  const std::size_t expected = 12 + (n + 7) / 8 + n * 12;
  if (bytes.size() != expected) {
    throw FormatError(bytes.size() < expected
                          ? "pointmap: truncated (" + std::to_string(bytes.size()) + " of " +
                                std::to_string(expected) + " bytes)"
                          : "pointmap: size mismatch with declared dimensions");
  }
  Pointmap pm(static_cast<int>(w), static_cast<int>(h));
  const auto bitmap = r.take((n + 7) / 8);
  for (std::size_t i = 0; i < n; ++i) pm.valid[i] = (bitmap[i / 8] >> (i % 8)) & 1u;
  for (std::size_t i = 0; i < n; ++i) {
    for (int k = 0; k < 3; ++k) pm.points[i][k] = r.f32();
  }
  r.expect_end();
  return pm;
}

void write_pointmap(const std::filesystem::path& path, const Pointmap& pointmap) {
  write_file(path, encode_pointmap(pointmap));
}

Pointmap read_pointmap(const std::filesystem::path& path) {
  return decode_pointmap(read_file(path));
}

}  // namespace splatgen
