#pragma once

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <numeric>
#include <ostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "spca/io.hpp"
#include "spca/types.hpp"

namespace spca {

namespace fs = std::filesystem;

/// Images as columns (row-major flattening), with class labels and an
/// optional occlusion mask.
struct ImageDataset {
  Matrix pixels;                  // (height*width) x n
  std::vector<int> labels;        // class id per column
  std::vector<std::string> names;  // "<class dir>/<file>" per column
  std::vector<std::string> class_names;
  Index height = 0;
  Index width = 0;
  std::vector<bool> corruption_mask;  // empty when never occluded

  Index size() const { return pixels.cols(); }
  bool occluded(Index i) const { return !corruption_mask.empty() && corruption_mask[static_cast<std::size_t>(i)]; }
  DataMatrix data() const { return DataMatrix(pixels); }

  void check() const {
    if (pixels.rows() != height * width)
      detail::fail("ImageDataset: ", pixels.rows(), " rows for a ", height, "x", width, " image");
    const auto n = static_cast<std::size_t>(pixels.cols());
    if (labels.size() != n || names.size() != n) detail::fail("ImageDataset: label/name count mismatch");
    if (!corruption_mask.empty() && corruption_mask.size() != n) detail::fail("ImageDataset: mask length mismatch");
  }

  /// Columns `idx`, in the given order.
  ImageDataset select(const std::vector<Index>& idx) const {
    ImageDataset out;
    out.height = height;
    out.width = width;
    out.class_names = class_names;
    out.pixels.resize(pixels.rows(), static_cast<Index>(idx.size()));
    for (std::size_t j = 0; j < idx.size(); ++j) {
      const Index src = idx[j];
      out.pixels.col(static_cast<Index>(j)) = pixels.col(src);
      out.labels.push_back(labels[static_cast<std::size_t>(src)]);
      out.names.push_back(names[static_cast<std::size_t>(src)]);
      if (!corruption_mask.empty()) out.corruption_mask.push_back(corruption_mask[static_cast<std::size_t>(src)]);
    }
    return out;
  }
};

// ---------------------------------------------------------------------------
// PGM

struct GrayImage {
  Index height = 0;
  Index width = 0;
  Vector pixels;  // row-major, scaled to [0, 1]
};

namespace detail {

// Next whitespace-delimited header token, skipping '#' comments.
inline std::string pgm_token(std::istream& in, const std::string& where) {
  std::string tok;
  int ch;
  for (;;) {
    ch = in.get();
    if (ch == EOF) throw io_error(where + ": truncated PGM header");
    if (ch == '#') {
      while (ch != '\n' && ch != EOF) ch = in.get();
      continue;
    }
    if (!std::isspace(ch)) break;
  }
  while (ch != EOF && !std::isspace(ch)) {
    tok.push_back(static_cast<char>(ch));
    ch = in.get();
  }
  return tok;
}

inline long long pgm_number(std::istream& in, const std::string& where) {
  const std::string tok = pgm_token(in, where);
  try {
    return parse_int(tok, where);
  } catch (const io_error&) {
    throw io_error(where + ": invalid PGM header field '" + tok + "'");
  }
}

}  // namespace detail

inline GrayImage read_pgm(std::istream& in, const std::string& where = "pgm") {
  char magic[2] = {0, 0};
  in.read(magic, 2);
  if (!in || magic[0] != 'P' || (magic[1] != '2' && magic[1] != '5')) throw io_error(where + ": not a P2/P5 PGM file");
  const bool binary = magic[1] == '5';
  const long long w = detail::pgm_number(in, where);
  const long long h = detail::pgm_number(in, where);
  const long long maxval = detail::pgm_number(in, where);
  if (w <= 0 || h <= 0) throw io_error(where + ": invalid PGM dimensions");
  if (maxval < 1 || maxval > 255) throw io_error(where + ": PGM maxval must be in [1, 255], got " + std::to_string(maxval));

  GrayImage img{h, w, Vector(h * w)};
  const auto count = static_cast<std::size_t>(w * h);
  if (binary) {
    // The single whitespace byte after maxval was consumed by pgm_token.
    std::vector<unsigned char> raw(count);
    in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(count));
    if (static_cast<std::size_t>(in.gcount()) != count) throw io_error(where + ": truncated PGM pixel data");
    for (std::size_t i = 0; i < count; ++i) {
      if (raw[i] > maxval) throw io_error(where + ": pixel value exceeds maxval");
      img.pixels[static_cast<Index>(i)] = static_cast<double>(raw[i]) / static_cast<double>(maxval);
    }
  } else {
    for (std::size_t i = 0; i < count; ++i) {
      long long v = 0;
      if (!(in >> v)) throw io_error(where + ": truncated PGM pixel data");
      if (v < 0 || v > maxval) throw io_error(where + ": pixel value out of range");
      img.pixels[static_cast<Index>(i)] = static_cast<double>(v) / static_cast<double>(maxval);
    }
  }
  return img;
}

inline GrayImage load_pgm(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw io_error("cannot open '" + path + "'");
  return read_pgm(in, path);
}

/// Writes 8-bit P5 with the given bytes (row-major).
inline void write_pgm_bytes(const std::string& path, Index height, Index width, const std::vector<unsigned char>& bytes) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw io_error("cannot open '" + path + "' for writing");
  out << "P5\n" << width << ' ' << height << "\n255\n";
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw io_error("write failed: '" + path + "'");
}

/// Writes a vector as a P5 image, mapping [min, max] linearly onto [0, 255].
/// Constant vectors become mid-gray 128.
inline void save_pgm(const Vector& v, Index height, Index width, const std::string& path) {
  if (height <= 0 || width <= 0 || v.size() != height * width)
    detail::fail("save_pgm: vector of length ", v.size(), " does not fit ", height, "x", width);
  const double lo = v.minCoeff();
  const double hi = v.maxCoeff();
  std::vector<unsigned char> bytes(static_cast<std::size_t>(v.size()));
  for (Index i = 0; i < v.size(); ++i) {
    const double level = hi > lo ? std::round(255.0 * (v[i] - lo) / (hi - lo)) : 128.0;
    bytes[static_cast<std::size_t>(i)] = static_cast<unsigned char>(std::clamp(level, 0.0, 255.0));
  }
  write_pgm_bytes(path, height, width, bytes);
}

/// Writes a [0, 1] image without rescaling (value * 255, rounded).
inline void save_pgm_unit(const Vector& v, Index height, Index width, const std::string& path) {
  if (v.size() != height * width) detail::fail("save_pgm_unit: size mismatch");
  std::vector<unsigned char> bytes(static_cast<std::size_t>(v.size()));
  for (Index i = 0; i < v.size(); ++i)
    bytes[static_cast<std::size_t>(i)] = static_cast<unsigned char>(std::clamp(std::round(v[i] * 255.0), 0.0, 255.0));
  write_pgm_bytes(path, height, width, bytes);
}

// ---------------------------------------------------------------------------
// Directory ingestion

namespace detail {

inline bool is_pgm(const fs::path& p) {
  std::string ext = p.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char ch) { return std::tolower(ch); });
  return ext == ".pgm";
}

inline std::vector<fs::path> sorted_entries(const fs::path& dir, bool want_dirs) {
  std::vector<fs::path> out;
  for (const auto& e : fs::directory_iterator(dir)) {
    const std::string name = e.path().filename().string();
    if (name.empty() || name.front() == '.') continue;
    if (want_dirs ? e.is_directory() : (e.is_regular_file() && is_pgm(e.path()))) out.push_back(e.path());
  }
  std::sort(out.begin(), out.end(), [](const fs::path& a, const fs::path& b) {
    return a.filename().string() < b.filename().string();
  });
  return out;
}

}  // namespace detail

/// Loads `root/<class>/<image>.pgm`. Classes are numbered by lexicographic
/// subdirectory order; columns follow lexicographic file order within each
/// class. Pixels are divided by the PGM maxval.
inline ImageDataset load_image_dir(const std::string& root) {
  if (!fs::is_directory(root)) throw io_error("'" + root + "' is not a directory");
  const auto classes = detail::sorted_entries(root, true);
  if (classes.empty()) throw io_error("'" + root + "': no class subdirectories");

  ImageDataset ds;
  std::vector<Vector> cols;
  for (std::size_t c = 0; c < classes.size(); ++c) {
    const std::string cname = classes[c].filename().string();
    ds.class_names.push_back(cname);
    for (const auto& file : detail::sorted_entries(classes[c], false)) {
      GrayImage img = load_pgm(file.string());
      if (cols.empty()) {
        ds.height = img.height;
        ds.width = img.width;
      } else if (img.height != ds.height || img.width != ds.width) {
        throw io_error("'" + file.string() + "': image is " + std::to_string(img.height) + "x" + std::to_string(img.width) +
                       ", expected " + std::to_string(ds.height) + "x" + std::to_string(ds.width));
      }
      cols.push_back(std::move(img.pixels));
      ds.labels.push_back(static_cast<int>(c));
      ds.names.push_back(cname + "/" + file.filename().string());
    }
  }
  if (cols.empty()) throw io_error("'" + root + "': no PGM images found");
  ds.pixels.resize(ds.height * ds.width, static_cast<Index>(cols.size()));
  for (std::size_t j = 0; j < cols.size(); ++j) ds.pixels.col(static_cast<Index>(j)) = cols[j];
  return ds;
}

/// Writes every column to `root/<name>` as an unscaled 8-bit P5 image.
inline void write_image_dir(const ImageDataset& ds, const std::string& root) {
  ds.check();
  for (Index j = 0; j < ds.size(); ++j) {
    const fs::path path = fs::path(root) / ds.names[static_cast<std::size_t>(j)];
    fs::create_directories(path.parent_path());
    save_pgm_unit(ds.pixels.col(j), ds.height, ds.width, path.string());
  }
}

// ---------------------------------------------------------------------------
// Transformations

/// Scales every column to unit l2 norm.
inline ImageDataset normalize_samples(ImageDataset ds) {
  for (Index j = 0; j < ds.size(); ++j) {
    const double norm = ds.pixels.col(j).norm();
    if (!(norm > 0.0)) detail::fail("normalize_samples: column ", j, " (", ds.names[static_cast<std::size_t>(j)], ") has zero norm");
    ds.pixels.col(j) /= norm;
  }
  return ds;
}

inline Matrix normalize_columns(Matrix X) {
  for (Index j = 0; j < X.cols(); ++j) {
    const double norm = X.col(j).norm();
    if (!(norm > 0.0)) detail::fail("normalize_columns: column ", j, " has zero norm");
    X.col(j) /= norm;
  }
  return X;
}

enum class OcclusionFill { black, uniform_random };

struct OcclusionOptions {
  double fraction = 0.3;
  double side_ratio = 0.25;
  OcclusionFill fill = OcclusionFill::black;
  std::uint64_t seed = 0;
};

namespace detail {

// floor/ceil robust to products like 0.3 * 10 = 3.0000000000000004.
inline Index floor_count(double x) { return static_cast<Index>(std::floor(x + 1e-9)); }
inline Index ceil_count(double x) { return static_cast<Index>(std::ceil(x - 1e-9)); }

// First m entries of a seeded Fisher-Yates shuffle of 0..n-1, sorted.
template <typename Rng>
std::vector<Index> choose(Index n, Index m, Rng& rng) {
  std::vector<Index> idx(static_cast<std::size_t>(n));
  std::iota(idx.begin(), idx.end(), Index{0});
  for (Index i = 0; i < m; ++i) {
    std::uniform_int_distribution<Index> pick(i, n - 1);
    std::swap(idx[static_cast<std::size_t>(i)], idx[static_cast<std::size_t>(pick(rng))]);
  }
  idx.resize(static_cast<std::size_t>(m));
  std::sort(idx.begin(), idx.end());
  return idx;
}

}  // namespace detail

/// Overwrites a floor(h*side) x floor(w*side) block, placed uniformly at
/// random inside the image, in floor(fraction*n) randomly chosen columns.
inline ImageDataset occlude(ImageDataset ds, const OcclusionOptions& opt) {
  ds.check();
  if (!(opt.fraction >= 0.0 && opt.fraction <= 1.0)) detail::fail("occlude: fraction must be in [0,1], got ", opt.fraction);
  if (!(opt.side_ratio > 0.0 && opt.side_ratio <= 1.0)) detail::fail("occlude: side_ratio must be in (0,1], got ", opt.side_ratio);
  const Index bh = detail::floor_count(static_cast<double>(ds.height) * opt.side_ratio);
  const Index bw = detail::floor_count(static_cast<double>(ds.width) * opt.side_ratio);
  if (bh > ds.height || bw > ds.width) detail::fail("occlude: block larger than image");
  const Index n = ds.size();
  const Index m = detail::floor_count(opt.fraction * static_cast<double>(n));
  if (ds.corruption_mask.empty()) ds.corruption_mask.assign(static_cast<std::size_t>(n), false);
  if (m == 0) return ds;
  if (bh < 1 || bw < 1)
    detail::fail("occlude: side_ratio ", opt.side_ratio, " gives an empty block on a ", ds.height, "x", ds.width, " image");

  std::mt19937_64 rng(opt.seed);
  const std::vector<Index> chosen = detail::choose(n, m, rng);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (Index j : chosen) {
    std::uniform_int_distribution<Index> row(0, ds.height - bh);
    std::uniform_int_distribution<Index> col(0, ds.width - bw);
    const Index r0 = row(rng);
    const Index c0 = col(rng);
    for (Index r = r0; r < r0 + bh; ++r) {
      for (Index c = c0; c < c0 + bw; ++c) {
        ds.pixels(r * ds.width + c, j) = opt.fill == OcclusionFill::black ? 0.0 : unit(rng);
      }
    }
    ds.corruption_mask[static_cast<std::size_t>(j)] = true;
  }
  return ds;
}

struct Split {
  ImageDataset train;
  ImageDataset test;
  std::vector<bool> is_train;  // per input column
};

/// Per class, ceil(count * train_ratio) columns go to train, the rest to
/// test. Both sides keep the input column order.
inline Split split_per_class(const ImageDataset& ds, double train_ratio = 0.5, std::uint64_t seed = 0) {
  ds.check();
  if (!(train_ratio > 0.0 && train_ratio <= 1.0)) detail::fail("split_per_class: train_ratio must be in (0,1], got ", train_ratio);
  std::map<int, std::vector<Index>> by_class;
  for (Index j = 0; j < ds.size(); ++j) by_class[ds.labels[static_cast<std::size_t>(j)]].push_back(j);

  std::mt19937_64 rng(seed);
  std::vector<bool> is_train(static_cast<std::size_t>(ds.size()), false);
  for (const auto& [label, members] : by_class) {
    const auto count = static_cast<Index>(members.size());
    if (count < 2) detail::fail("split_per_class: class ", label, " has ", count, " sample(s), need at least 2");
    const Index take = detail::ceil_count(static_cast<double>(count) * train_ratio);
    for (Index pos : detail::choose(count, take, rng)) is_train[static_cast<std::size_t>(members[static_cast<std::size_t>(pos)])] = true;
  }
  std::vector<Index> train_idx, test_idx;
  for (Index j = 0; j < ds.size(); ++j) (is_train[static_cast<std::size_t>(j)] ? train_idx : test_idx).push_back(j);
  return {ds.select(train_idx), ds.select(test_idx), std::move(is_train)};
}

// ---------------------------------------------------------------------------
// Manifest CSV: file,class,is_train,is_occluded

struct ManifestRow {
  std::string file;
  int label = 0;
  bool is_train = false;
  bool is_occluded = false;
};

inline void write_manifest(std::ostream& out, const std::vector<ManifestRow>& rows) {
  out << "file,class,is_train,is_occluded\n";
  for (const auto& r : rows) out << r.file << ',' << r.label << ',' << (r.is_train ? 1 : 0) << ',' << (r.is_occluded ? 1 : 0) << '\n';
}

inline std::vector<ManifestRow> read_manifest(std::istream& in, const std::string& where = "manifest") {
  std::string line;
  if (!std::getline(in, line) || detail::trim(line) != "file,class,is_train,is_occluded")
    throw io_error(where + ": missing manifest header");
  std::vector<ManifestRow> rows;
  while (detail::next_line(in, line)) {
    const auto cells = detail::split(line, ',');
    if (cells.size() != 4) throw io_error(where + ": malformed row '" + line + "'");
    rows.push_back({std::string(cells[0]), static_cast<int>(detail::parse_int(cells[1], where)),
                    detail::parse_int(cells[2], where) != 0, detail::parse_int(cells[3], where) != 0});
  }
  return rows;
}

}  // namespace spca
