#include "vfuse/io.hpp"

#include <bit>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>
#include <type_traits>

#include <nlohmann/json.hpp>

namespace vfuse {

namespace {

// ---------------------------------------------------------------------------
// Little-endian byte plumbing. Whole files are staged in memory; every
// artifact here is at most tens of megabytes.

class ByteWriter {
 public:
  void u32(std::uint32_t value) { put_uint(value); }
  void i32(std::int32_t value) { put_uint(static_cast<std::uint32_t>(value)); }
  void u64(std::uint64_t value) { put_uint(value); }
  void f32(float value) { put_uint(std::bit_cast<std::uint32_t>(value)); }
  void f64(double value) { put_uint(std::bit_cast<std::uint64_t>(value)); }
  void raw(std::string_view bytes) { buf_.append(bytes); }

  void save(const std::string& path) const {
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    if (!os) throw IoError(path + ": cannot open for writing");
    os.write(buf_.data(), static_cast<std::streamsize>(buf_.size()));
    if (!os) throw IoError(path + ": write failed");
  }

 private:
  template <typename U>
  void put_uint(U value) {
    for (std::size_t i = 0; i < sizeof(U); ++i)
      buf_.push_back(static_cast<char>((value >> (8 * i)) & 0xff));
  }

  std::string buf_;
};

class ByteReader {
 public:
  ByteReader(const std::string& path) : path_(path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw IoError(path + ": cannot open");
    std::ostringstream ss;
    ss << is.rdbuf();
    buf_ = std::move(ss).str();
  }

  std::uint32_t u32() { return take_uint<std::uint32_t>(); }
  std::int32_t i32() { return static_cast<std::int32_t>(take_uint<std::uint32_t>()); }
  std::uint64_t u64() { return take_uint<std::uint64_t>(); }
  float f32() { return std::bit_cast<float>(take_uint<std::uint32_t>()); }
  double f64() { return std::bit_cast<double>(take_uint<std::uint64_t>()); }

  void expect_magic(std::string_view magic) {
    if (buf_.size() < pos_ + magic.size() ||
        std::string_view(buf_).substr(pos_, magic.size()) != magic)
      throw IoError(path_ + ": bad magic, expected \"" + std::string(magic) + "\"");
    pos_ += magic.size();
  }

  void expect_end() const {
    if (pos_ != buf_.size()) throw IoError(path_ + ": trailing bytes after payload");
  }

  const std::string& path() const { return path_; }

 private:
  template <typename U>
  U take_uint() {
    if (buf_.size() - pos_ < sizeof(U)) throw IoError(path_ + ": truncated file");
    U value = 0;
    for (std::size_t i = 0; i < sizeof(U); ++i)
      value |= static_cast<U>(static_cast<unsigned char>(buf_[pos_ + i])) << (8 * i);
    pos_ += sizeof(U);
    return value;
  }

  std::string path_;
  std::string buf_;
  std::size_t pos_ = 0;
};

// Shortest text that parses back to the same double ("%.17g" is always
// sufficient; try fewer digits first so files stay readable).
std::string format_double(double value) {
  char buf[40];
  for (int prec = 15; prec <= 17; ++prec) {
    std::snprintf(buf, sizeof(buf), "%.*g", prec, value);
    if (std::strtod(buf, nullptr) == value) break;
  }
  return buf;
}

std::string format_float(float value) {
  char buf[32];
  for (int prec = 6; prec <= 9; ++prec) {
    std::snprintf(buf, sizeof(buf), "%.*g", prec, static_cast<double>(value));
    if (std::strtof(buf, nullptr) == value) break;
  }
  return buf;
}

void check_magic(std::string_view magic) {
  if (magic.size() != 4) throw Error("grid magic must be 4 bytes");
}

}  // namespace

// ---------------------------------------------------------------------------
// Scalar grids

void write_grid(const std::string& path, const Image& image, std::string_view magic) {
  check_magic(magic);
  ByteWriter out;
  out.raw(magic);
  out.u32(static_cast<std::uint32_t>(image.width()));
  out.u32(static_cast<std::uint32_t>(image.height()));
  for (double value : image.data()) out.f32(static_cast<float>(value));
  out.save(path);
}

Image read_grid(const std::string& path, std::string_view expected_magic) {
  check_magic(expected_magic);
  ByteReader in(path);
  in.expect_magic(expected_magic);
  std::uint32_t w = in.u32();
  std::uint32_t h = in.u32();
  if (w == 0 || h == 0 || w > 1u << 20 || h > 1u << 20)
    throw IoError(path + ": implausible grid size");
  Image image(static_cast<int>(w), static_cast<int>(h));
  for (double& value : image.data()) value = static_cast<double>(in.f32());
  in.expect_end();
  return image;
}

// ---------------------------------------------------------------------------
// Trajectories

void write_trajectory(const std::string& path, const std::vector<Pose>& poses) {
  std::ofstream os(path, std::ios::trunc);
  if (!os) throw IoError(path + ": cannot open for writing");
  os << "# timestamp tx ty tz qx qy qz qw\n";
  for (std::size_t i = 0; i < poses.size(); ++i) {
    const Eigen::Vector3d& t = poses[i].translation();
    const Eigen::Quaterniond& q = poses[i].quaternion();
    os << i << ' ' << format_double(t.x()) << ' ' << format_double(t.y()) << ' '
       << format_double(t.z()) << ' ' << format_double(q.x()) << ' ' << format_double(q.y())
       << ' ' << format_double(q.z()) << ' ' << format_double(q.w()) << '\n';
  }
  if (!os) throw IoError(path + ": write failed");
}

std::vector<Pose> read_trajectory(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw IoError(path + ": cannot open");
  std::vector<Pose> poses;
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ss(line);
    double ts, tx, ty, tz, qx, qy, qz, qw;
    if (!(ss >> ts >> tx >> ty >> tz >> qx >> qy >> qz >> qw))
      throw IoError(path + ":" + std::to_string(lineno) + ": expected 8 numbers per line");
    poses.emplace_back(Eigen::Quaterniond(qw, qx, qy, qz), Eigen::Vector3d(tx, ty, tz));
  }
  return poses;
}

// ---------------------------------------------------------------------------
// PLY

namespace {

void write_ply(const std::string& path, const std::vector<Eigen::Vector3d>& points,
               const std::vector<double>* scalar, const std::string& scalar_name,
               const std::vector<std::array<int, 3>>* faces, bool binary) {
  if (scalar && scalar->size() != points.size())
    throw DimensionMismatch("per-point scalar count must match point count");

  std::string header = "ply\n";
  header += binary ? "format binary_little_endian 1.0\n" : "format ascii 1.0\n";
  header += "element vertex " + std::to_string(points.size()) + "\n";
  header += "property float x\nproperty float y\nproperty float z\n";
  if (scalar) header += "property float " + scalar_name + "\n";
  if (faces) {
    header += "element face " + std::to_string(faces->size()) + "\n";
    header += "property list uchar int vertex_indices\n";
  }
  header += "end_header\n";

  ByteWriter out;
  out.raw(header);
  for (std::size_t i = 0; i < points.size(); ++i) {
    const Eigen::Vector3d& p = points[i];
    if (binary) {
      out.f32(static_cast<float>(p.x()));
      out.f32(static_cast<float>(p.y()));
      out.f32(static_cast<float>(p.z()));
      if (scalar) out.f32(static_cast<float>((*scalar)[i]));
    } else {
      std::string line = format_float(static_cast<float>(p.x())) + " " +
                         format_float(static_cast<float>(p.y())) + " " +
                         format_float(static_cast<float>(p.z()));
      if (scalar) line += " " + format_float(static_cast<float>((*scalar)[i]));
      line += "\n";
      out.raw(line);
    }
  }
  if (faces) {
    for (const auto& f : *faces) {
      if (binary) {
        out.raw(std::string_view("\x03", 1));
        out.i32(f[0]);
        out.i32(f[1]);
        out.i32(f[2]);
      } else {
        out.raw("3 " + std::to_string(f[0]) + " " + std::to_string(f[1]) + " " +
                std::to_string(f[2]) + "\n");
      }
    }
  }
  out.save(path);
}

struct PlyProperty {
  std::string name;
  std::string type;
};

struct PlyData {
  std::vector<Eigen::Vector3d> points;
  std::vector<double> uncertainty;  // empty when the property is absent
  std::vector<std::array<int, 3>> faces;
};

std::size_t scalar_size(const std::string& path, const std::string& type) {
  if (type == "char" || type == "uchar" || type == "int8" || type == "uint8") return 1;
  if (type == "short" || type == "ushort" || type == "int16" || type == "uint16") return 2;
  if (type == "int" || type == "uint" || type == "int32" || type == "uint32" || type == "float" ||
      type == "float32")
    return 4;
  if (type == "double" || type == "float64") return 8;
  throw IoError(path + ": unsupported property type " + type);
}

PlyData read_ply(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError(path + ": cannot open");
  std::string content;
  {
    std::ostringstream ss;
    ss << is.rdbuf();
    content = std::move(ss).str();
  }

  std::size_t header_end = content.find("end_header\n");
  if (content.rfind("ply\n", 0) != 0 || header_end == std::string::npos)
    throw IoError(path + ": not a PLY file");
  std::istringstream header(content.substr(0, header_end));
  std::size_t body_pos = header_end + std::strlen("end_header\n");

  bool binary = false;
  std::size_t vertex_count = 0, face_count = 0;
  std::vector<PlyProperty> vertex_props;
  bool have_faces = false;
  std::string line, current_element;
  while (std::getline(header, line)) {
    std::istringstream ss(line);
    std::string word;
    ss >> word;
    if (word == "format") {
      std::string fmt;
      ss >> fmt;
      if (fmt == "binary_little_endian")
        binary = true;
      else if (fmt != "ascii")
        throw IoError(path + ": unsupported PLY format " + fmt);
    } else if (word == "element") {
      std::size_t count;
      ss >> current_element >> count;
      if (current_element == "vertex")
        vertex_count = count;
      else if (current_element == "face") {
        face_count = count;
        have_faces = true;
      } else
        throw IoError(path + ": unsupported PLY element " + current_element);
    } else if (word == "property") {
      std::string type;
      ss >> type;
      if (current_element == "vertex") {
        if (type == "list") throw IoError(path + ": list property on vertices unsupported");
        PlyProperty prop;
        prop.type = type;
        ss >> prop.name;
        vertex_props.push_back(prop);
      }
      // Face properties: only the single index list we write is supported;
      // the body parser assumes it.
    }
  }

  int ix = -1, iy = -1, iz = -1, iu = -1;
  for (int i = 0; i < static_cast<int>(vertex_props.size()); ++i) {
    if (vertex_props[i].name == "x") ix = i;
    if (vertex_props[i].name == "y") iy = i;
    if (vertex_props[i].name == "z") iz = i;
    if (vertex_props[i].name == "uncertainty") iu = i;
  }
  if (ix < 0 || iy < 0 || iz < 0) throw IoError(path + ": PLY lacks x/y/z vertex properties");

  PlyData data;
  data.points.reserve(vertex_count);
  if (iu >= 0) data.uncertainty.reserve(vertex_count);

  if (binary) {
    const char* p = content.data() + body_pos;
    const char* end = content.data() + content.size();
    auto need = [&](std::size_t n) {
      if (static_cast<std::size_t>(end - p) < n) throw IoError(path + ": truncated file");
    };
    auto read_scalar = [&](const std::string& type) -> double {
      std::size_t size = scalar_size(path, type);
      need(size);
      double out = 0.0;
      if (type == "float" || type == "float32") {
        std::uint32_t u = 0;
        for (std::size_t i = 0; i < 4; ++i)
          u |= static_cast<std::uint32_t>(static_cast<unsigned char>(p[i])) << (8 * i);
        out = std::bit_cast<float>(u);
      } else if (type == "double" || type == "float64") {
        std::uint64_t u = 0;
        for (std::size_t i = 0; i < 8; ++i)
          u |= static_cast<std::uint64_t>(static_cast<unsigned char>(p[i])) << (8 * i);
        out = std::bit_cast<double>(u);
      } else {
        std::int64_t u = 0;
        for (std::size_t i = 0; i < size; ++i)
          u |= static_cast<std::int64_t>(static_cast<unsigned char>(p[i])) << (8 * i);
        out = static_cast<double>(u);
      }
      p += size;
      return out;
    };
    for (std::size_t vi = 0; vi < vertex_count; ++vi) {
      double values[3] = {0, 0, 0};
      double u_val = 0.0;
      for (int i = 0; i < static_cast<int>(vertex_props.size()); ++i) {
        double v = read_scalar(vertex_props[i].type);
        if (i == ix) values[0] = v;
        if (i == iy) values[1] = v;
        if (i == iz) values[2] = v;
        if (i == iu) u_val = v;
      }
      data.points.emplace_back(values[0], values[1], values[2]);
      if (iu >= 0) data.uncertainty.push_back(u_val);
    }
    if (have_faces) {
      for (std::size_t fi = 0; fi < face_count; ++fi) {
        need(1);
        int n = static_cast<unsigned char>(*p++);
        if (n != 3) throw IoError(path + ": only triangle faces supported");
        std::array<int, 3> f;
        for (int i = 0; i < 3; ++i) {
          need(4);
          std::uint32_t u = 0;
          for (std::size_t b = 0; b < 4; ++b)
            u |= static_cast<std::uint32_t>(static_cast<unsigned char>(p[b])) << (8 * b);
          f[i] = static_cast<int>(u);
          p += 4;
        }
        data.faces.push_back(f);
      }
    }
  } else {
    std::istringstream body(content.substr(body_pos));
    for (std::size_t vi = 0; vi < vertex_count; ++vi) {
      double values[3] = {0, 0, 0};
      double u_val = 0.0;
      for (int i = 0; i < static_cast<int>(vertex_props.size()); ++i) {
        double v;
        if (!(body >> v)) throw IoError(path + ": truncated vertex data");
        if (i == ix) values[0] = v;
        if (i == iy) values[1] = v;
        if (i == iz) values[2] = v;
        if (i == iu) u_val = v;
      }
      data.points.emplace_back(values[0], values[1], values[2]);
      if (iu >= 0) data.uncertainty.push_back(u_val);
    }
    if (have_faces) {
      for (std::size_t fi = 0; fi < face_count; ++fi) {
        int n;
        std::array<int, 3> f;
        if (!(body >> n >> f[0] >> f[1] >> f[2]) || n != 3)
          throw IoError(path + ": only triangle faces supported");
        data.faces.push_back(f);
      }
    }
  }

  for (const auto& f : data.faces)
    for (int idx : f)
      if (idx < 0 || idx >= static_cast<int>(data.points.size()))
        throw IoError(path + ": face index out of range");
  return data;
}

}  // namespace

void write_mesh_ply(const std::string& path, const TriangleMesh& mesh, bool binary) {
  if (mesh.uncertainty.size() != mesh.vertices.size())
    throw DimensionMismatch("mesh uncertainty count must match vertex count");
  write_ply(path, mesh.vertices, &mesh.uncertainty, "uncertainty", &mesh.triangles, binary);
}

TriangleMesh read_mesh_ply(const std::string& path) {
  PlyData data = read_ply(path);
  TriangleMesh mesh;
  mesh.vertices = std::move(data.points);
  mesh.uncertainty = std::move(data.uncertainty);
  if (mesh.uncertainty.empty()) mesh.uncertainty.assign(mesh.vertices.size(), 0.0);
  mesh.triangles = std::move(data.faces);
  return mesh;
}

void write_cloud_ply(const std::string& path, const PointCloud& cloud,
                     const std::vector<double>* scalar, const std::string& scalar_name,
                     bool binary) {
  write_ply(path, cloud.points, scalar, scalar_name, nullptr, binary);
}

PointCloud read_cloud_ply(const std::string& path) {
  PointCloud cloud;
  cloud.points = read_ply(path).points;
  return cloud;
}

// ---------------------------------------------------------------------------
// TSDF snapshots

void write_tsdf(const std::string& path, const TsdfVolume& volume) {
  ByteWriter out;
  out.raw("TSDF");
  for (int i = 0; i < 3; ++i) out.f64(volume.origin()[i]);
  out.f64(volume.voxel_size());
  for (int i = 0; i < 3; ++i) out.u32(static_cast<std::uint32_t>(volume.dims()[i]));
  out.f64(volume.truncation());
  const auto& phi = volume.phi_data();
  const auto& weight = volume.weight_data();
  for (std::size_t i = 0; i < phi.size(); ++i) {
    out.f32(phi[i]);
    out.f32(weight[i]);
  }
  out.save(path);
}

TsdfVolume read_tsdf(const std::string& path) {
  ByteReader in(path);
  in.expect_magic("TSDF");
  Eigen::Vector3d origin;
  for (int i = 0; i < 3; ++i) origin[i] = in.f64();
  double voxel = in.f64();
  std::array<int, 3> dims;
  for (int i = 0; i < 3; ++i) {
    std::uint32_t d = in.u32();
    if (d == 0 || d > 4096u) throw IoError(path + ": implausible volume dimension");
    dims[i] = static_cast<int>(d);
  }
  double tau = in.f64();
  TsdfVolume volume(origin, voxel, dims, tau);
  auto& phi = volume.phi_data();
  auto& weight = volume.weight_data();
  for (std::size_t i = 0; i < phi.size(); ++i) {
    phi[i] = in.f32();
    weight[i] = in.f32();
  }
  in.expect_end();
  return volume;
}

// ---------------------------------------------------------------------------
// Factor graphs

void write_factor_graph(const std::string& path, const FactorGraph& graph) {
  ByteWriter out;
  out.raw("FGRF");
  out.u32(1);  // version
  out.f64(graph.intrinsics.fx);
  out.f64(graph.intrinsics.fy);
  out.f64(graph.intrinsics.cx);
  out.f64(graph.intrinsics.cy);
  out.i32(graph.intrinsics.width);
  out.i32(graph.intrinsics.height);
  out.i32(graph.grid_width);
  out.i32(graph.grid_height);
  out.u32(static_cast<std::uint32_t>(graph.gauge.size()));
  for (int g : graph.gauge) out.i32(g);
  out.u32(static_cast<std::uint32_t>(graph.keyframes.size()));
  for (const Keyframe& kf : graph.keyframes) {
    const Eigen::Quaterniond& q = kf.pose.quaternion();
    const Eigen::Vector3d& t = kf.pose.translation();
    out.f64(q.x());
    out.f64(q.y());
    out.f64(q.z());
    out.f64(q.w());
    out.f64(t.x());
    out.f64(t.y());
    out.f64(t.z());
    out.u32(static_cast<std::uint32_t>(kf.inv_depth.width()));
    out.u32(static_cast<std::uint32_t>(kf.inv_depth.height()));
    for (double d : kf.inv_depth.data()) out.f64(d);
  }
  out.u64(graph.factors.size());
  for (const FlowFactor& f : graph.factors) {
    out.i32(f.frame_i);
    out.i32(f.frame_j);
    out.i32(f.px);
    out.i32(f.py);
    out.f64(f.target.x());
    out.f64(f.target.y());
    out.f64(f.weight_x);
    out.f64(f.weight_y);
  }
  out.save(path);
}

FactorGraph read_factor_graph(const std::string& path) {
  ByteReader in(path);
  in.expect_magic("FGRF");
  std::uint32_t version = in.u32();
  if (version != 1) throw IoError(path + ": unsupported version " + std::to_string(version));
  FactorGraph graph;
  graph.intrinsics.fx = in.f64();
  graph.intrinsics.fy = in.f64();
  graph.intrinsics.cx = in.f64();
  graph.intrinsics.cy = in.f64();
  graph.intrinsics.width = in.i32();
  graph.intrinsics.height = in.i32();
  graph.grid_width = in.i32();
  graph.grid_height = in.i32();
  if (graph.grid_width <= 0 || graph.grid_height <= 0 || graph.grid_width > (1 << 20) ||
      graph.grid_height > (1 << 20))
    throw IoError(path + ": implausible grid size");
  std::uint32_t gauge_count = in.u32();
  graph.gauge.clear();
  for (std::uint32_t i = 0; i < gauge_count; ++i) graph.gauge.push_back(in.i32());
  std::uint32_t frame_count = in.u32();
  graph.keyframes.reserve(frame_count);
  for (std::uint32_t i = 0; i < frame_count; ++i) {
    Keyframe kf;
    double qx = in.f64(), qy = in.f64(), qz = in.f64(), qw = in.f64();
    double tx = in.f64(), ty = in.f64(), tz = in.f64();
    kf.pose = Pose(Eigen::Quaterniond(qw, qx, qy, qz), Eigen::Vector3d(tx, ty, tz));
    std::uint32_t w = in.u32();
    std::uint32_t h = in.u32();
    if (w == 0 || h == 0 || w > 1u << 20 || h > 1u << 20)
      throw IoError(path + ": implausible grid size");
    kf.inv_depth = Image(static_cast<int>(w), static_cast<int>(h));
    for (double& d : kf.inv_depth.data()) d = in.f64();
    graph.keyframes.push_back(std::move(kf));
  }
  std::uint64_t factor_count = in.u64();
  graph.factors.reserve(factor_count);
  for (std::uint64_t i = 0; i < factor_count; ++i) {
    FlowFactor f;
    f.frame_i = in.i32();
    f.frame_j = in.i32();
    f.px = in.i32();
    f.py = in.i32();
    f.target.x() = in.f64();
    f.target.y() = in.f64();
    f.weight_x = in.f64();
    f.weight_y = in.f64();
    graph.factors.push_back(f);
  }
  in.expect_end();
  return graph;
}

// ---------------------------------------------------------------------------
// Hessian debug dump

void write_hessian_dump(const std::string& path, const BlockSparseHessian& h) {
  const int cols = 6 * h.num_free;
  ByteWriter out;
  out.raw("HESS");
  out.u32(static_cast<std::uint32_t>(h.num_free));
  out.u64(static_cast<std::uint64_t>(h.depth_count()));
  out.f64(h.damping);
  for (int r = 0; r < cols; ++r)
    for (int c = 0; c < cols; ++c) out.f64(h.C(r, c));
  Eigen::VectorXd row(cols);
  for (int k = 0; k < h.depth_count(); ++k) {
    row.setZero();
    for (const auto& block : h.e_cols[k]) row.segment<6>(6 * block.pose) = block.v;
    for (int c = 0; c < cols; ++c) out.f64(row[c]);
  }
  for (int k = 0; k < h.depth_count(); ++k) out.f64(h.P[k]);
  for (int c = 0; c < cols; ++c) out.f64(h.v[c]);
  for (int k = 0; k < h.depth_count(); ++k) out.f64(h.w[k]);
  out.save(path);
}

HessianDump read_hessian_dump(const std::string& path) {
  ByteReader in(path);
  in.expect_magic("HESS");
  HessianDump dump;
  dump.num_free = static_cast<int>(in.u32());
  std::uint64_t depths = in.u64();
  if (dump.num_free < 0 || dump.num_free > 4096 || depths > (1ull << 32))
    throw IoError(path + ": implausible dimensions");
  dump.damping = in.f64();
  const int cols = 6 * dump.num_free;
  const int d = static_cast<int>(depths);
  dump.C.resize(cols, cols);
  for (int r = 0; r < cols; ++r)
    for (int c = 0; c < cols; ++c) dump.C(r, c) = in.f64();
  dump.E.resize(d, cols);
  for (int k = 0; k < d; ++k)
    for (int c = 0; c < cols; ++c) dump.E(k, c) = in.f64();
  dump.P.resize(d);
  for (int k = 0; k < d; ++k) dump.P[k] = in.f64();
  dump.v.resize(cols);
  for (int c = 0; c < cols; ++c) dump.v[c] = in.f64();
  dump.w.resize(d);
  for (int k = 0; k < d; ++k) dump.w[k] = in.f64();
  in.expect_end();
  return dump;
}

// ---------------------------------------------------------------------------
// Reports

void write_report(const std::string& txt_path, const std::string& json_path,
                  const std::vector<std::pair<std::string, double>>& numbers,
                  const std::vector<std::pair<std::string, std::string>>& strings) {
  {
    std::ofstream os(txt_path, std::ios::trunc);
    if (!os) throw IoError(txt_path + ": cannot open for writing");
    for (const auto& [key, value] : numbers) os << key << '=' << format_double(value) << '\n';
    for (const auto& [key, value] : strings) os << key << '=' << value << '\n';
    if (!os) throw IoError(txt_path + ": write failed");
  }
  nlohmann::ordered_json json;
  for (const auto& [key, value] : numbers) {
    if (std::isfinite(value))
      json[key] = value;
    else
      json[key] = format_double(value);  // JSON has no inf/nan literals
  }
  for (const auto& [key, value] : strings) json[key] = value;
  std::ofstream os(json_path, std::ios::trunc);
  if (!os) throw IoError(json_path + ": cannot open for writing");
  os << json.dump(2) << '\n';
  if (!os) throw IoError(json_path + ": write failed");
}

std::vector<std::pair<std::string, double>> report_numbers(const EvalReport& report) {
  return {
      {"accuracy_rmse", report.accuracy_rmse},
      {"accuracy_mean", report.accuracy_mean},
      {"accuracy_inliers", report.accuracy_inliers},
      {"completeness_rmse", report.completeness_rmse},
      {"completeness_mean", report.completeness_mean},
      {"completeness_inliers", report.completeness_inliers},
      {"est_points", static_cast<double>(report.est_points)},
      {"gt_points", static_cast<double>(report.gt_points)},
      {"max_dist", report.max_dist},
      {"icp_applied", report.icp_applied ? 1.0 : 0.0},
  };
}

std::map<std::string, std::string> read_report_txt(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw IoError(path + ": cannot open");
  std::map<std::string, std::string> out;
  std::string line;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::size_t eq = line.find('=');
    if (eq == std::string::npos) throw IoError(path + ": malformed report line: " + line);
    out[line.substr(0, eq)] = line.substr(eq + 1);
  }
  return out;
}

}  // namespace vfuse
