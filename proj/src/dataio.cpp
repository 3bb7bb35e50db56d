#include "cdda/dataio.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <charconv>
#include <cmath>
#include <fstream>
#include <random>
#include <sstream>
#include <string_view>
#include <type_traits>

namespace cdda {

Eigen::Index Dataset::size() const {
  if (features.cols() > 0 || !labels) return features.cols();
  return static_cast<Eigen::Index>(labels->size());
}

DatasetFormat format_from_path(const std::string& path) {
  auto ends_with = [&](std::string_view suffix) {
    return path.size() >= suffix.size() &&
           path.compare(path.size() - suffix.size(), suffix.size(), suffix) == 0;
  };
  if (ends_with(".csv")) return DatasetFormat::Csv;
  if (ends_with(".cdda")) return DatasetFormat::Binary;
  throw Error(ErrorKind::Config, "unknown dataset extension for '" + path + "' (want .csv or .cdda)");
}

namespace {

[[noreturn]] void parse_fail(const std::string& name, std::size_t line, std::size_t field,
                             const std::string& msg) {
  std::ostringstream os;
  os << name << ":" << line;
  if (field > 0) os << ":" << field;
  os << ": " << msg;
  throw Error(ErrorKind::Parse, os.str());
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    out.push_back(trim(line.substr(start, comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

template <typename T>
bool parse_number(std::string_view s, T& value) {
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  return ec == std::errc() && ptr == s.data() + s.size() && !s.empty();
}

std::string format_double(double v) {
  std::array<char, 32> buf{};
  const auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), ptr);
}

void check_labels_positive(const std::vector<int>& labels, const std::string& name) {
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] < 1) {
      std::ostringstream os;
      os << name << ": label " << labels[i] << " of sample " << i + 1 << " is below 1";
      throw Error(ErrorKind::InvalidLabel, os.str());
    }
  }
}

}  // namespace

Dataset read_csv(std::istream& in, const std::string& source_name) {
  std::string line;
  std::size_t line_no = 0;
  bool have_header = false;
  while (!have_header && std::getline(in, line)) {
    ++line_no;
    if (!trim(line).empty()) have_header = true;
  }
  if (!have_header) parse_fail(source_name, line_no, 0, "missing header 'm,n,has_labels'");

  const auto header = split_fields(line);
  long long m = -1;
  long long n = -1;
  int has_labels = -1;
  if (header.size() != 3 || !parse_number(header[0], m) || !parse_number(header[1], n) ||
      !parse_number(header[2], has_labels) || m < 0 || n < 0 ||
      (has_labels != 0 && has_labels != 1)) {
    parse_fail(source_name, line_no, 0, "header must be 'm,n,has_labels' with has_labels 0 or 1");
  }
  if (m == 0 && has_labels == 0) {
    parse_fail(source_name, line_no, 0, "a file with no features must carry labels");
  }

  Dataset data;
  data.features.resize(m, n);
  if (has_labels) data.labels.emplace(static_cast<std::size_t>(n));
  const std::size_t expected = static_cast<std::size_t>(m + has_labels);
  const std::size_t header_line = line_no;

  long long row = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    if (row >= n) {
      std::ostringstream os;
      os << "header on line " << header_line << " declares " << n << " samples; extra row here";
      parse_fail(source_name, line_no, 0, os.str());
    }
    const auto fields = split_fields(line);
    if (fields.size() != expected) {
      std::ostringstream os;
      os << "expected " << expected << " fields, found " << fields.size();
      parse_fail(source_name, line_no, 0, os.str());
    }
    for (long long r = 0; r < m; ++r) {
      double v = 0.0;
      const auto& f = fields[static_cast<std::size_t>(r)];
      if (!parse_number(f, v) || !std::isfinite(v)) {
        parse_fail(source_name, line_no, static_cast<std::size_t>(r + 1),
                   "not a finite number: '" + std::string(f) + "'");
      }
      data.features(r, row) = v;
    }
    if (has_labels) {
      int label = 0;
      const auto& f = fields.back();
      if (!parse_number(f, label)) {
        parse_fail(source_name, line_no, expected, "label is not an integer: '" + std::string(f) + "'");
      }
      (*data.labels)[static_cast<std::size_t>(row)] = label;
    }
    ++row;
  }
  if (row != n) {
    std::ostringstream os;
    os << "header on line " << header_line << " declares " << n << " samples, file has " << row;
    parse_fail(source_name, line_no, 0, os.str());
  }
  if (data.labels) check_labels_positive(*data.labels, source_name);
  return data;
}

void write_csv(std::ostream& out, const Dataset& data) {
  const Eigen::Index n = data.size();
  out << data.dim() << ',' << n << ',' << (data.labels ? 1 : 0) << '\n';
  for (Eigen::Index j = 0; j < n; ++j) {
    for (Eigen::Index r = 0; r < data.dim(); ++r) {
      if (r > 0) out << ',';
      out << format_double(data.features(r, j));
    }
    if (data.labels) {
      if (data.dim() > 0) out << ',';
      out << (*data.labels)[static_cast<std::size_t>(j)];
    }
    out << '\n';
  }
}

namespace {

constexpr std::string_view kMagic = "CDDA1";

template <typename T>
void put_le(std::ostream& out, T value) {
  std::array<unsigned char, sizeof(T)> bytes{};
  std::uint64_t bits = 0;
  if constexpr (std::is_same_v<T, double>) {
    bits = std::bit_cast<std::uint64_t>(value);
  } else {
    bits = static_cast<std::uint64_t>(static_cast<std::make_unsigned_t<T>>(value));
  }
  for (std::size_t i = 0; i < sizeof(T); ++i) bytes[i] = static_cast<unsigned char>(bits >> (8 * i));
  out.write(reinterpret_cast<const char*>(bytes.data()), sizeof(T));
}

template <typename T>
T get_le(std::istream& in, const std::string& name, const char* what) {
  std::array<unsigned char, sizeof(T)> bytes{};
  if (!in.read(reinterpret_cast<char*>(bytes.data()), sizeof(T))) {
    parse_fail(name, 0, 0, std::string("truncated file while reading ") + what);
  }
  std::uint64_t bits = 0;
  for (std::size_t i = 0; i < sizeof(T); ++i) bits |= static_cast<std::uint64_t>(bytes[i]) << (8 * i);
  if constexpr (std::is_same_v<T, double>) {
    return std::bit_cast<double>(bits);
  } else {
    return static_cast<T>(static_cast<std::make_unsigned_t<T>>(bits));
  }
}

}  // namespace

Dataset read_binary(std::istream& in, const std::string& source_name) {
  std::array<char, 5> magic{};
  if (!in.read(magic.data(), magic.size()) ||
      std::string_view(magic.data(), magic.size()) != kMagic) {
    parse_fail(source_name, 0, 0, "missing CDDA1 magic");
  }
  const auto m = get_le<std::uint32_t>(in, source_name, "m");
  const auto n = get_le<std::uint32_t>(in, source_name, "n");
  const auto flag = get_le<std::uint8_t>(in, source_name, "label flag");
  if (flag > 1) parse_fail(source_name, 0, 0, "label flag must be 0 or 1");
  if (m == 0 && flag == 0) parse_fail(source_name, 0, 0, "a file with no features must carry labels");

  Dataset data;
  data.features.resize(m, n);
  for (std::uint32_t j = 0; j < n; ++j) {
    for (std::uint32_t r = 0; r < m; ++r) {
      const double v = get_le<double>(in, source_name, "features");
      if (!std::isfinite(v)) parse_fail(source_name, 0, 0, "non-finite feature value");
      data.features(r, j) = v;
    }
  }
  if (flag) {
    data.labels.emplace(n);
    for (std::uint32_t j = 0; j < n; ++j) (*data.labels)[j] = get_le<std::int32_t>(in, source_name, "labels");
    check_labels_positive(*data.labels, source_name);
  }
  if (in.peek() != std::char_traits<char>::eof()) {
    parse_fail(source_name, 0, 0, "trailing bytes after declared payload");
  }
  return data;
}

void write_binary(std::ostream& out, const Dataset& data) {
  out.write(kMagic.data(), static_cast<std::streamsize>(kMagic.size()));
  const Eigen::Index n = data.size();
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(data.dim()));
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(n));
  put_le<std::uint8_t>(out, data.labels ? 1 : 0);
  for (Eigen::Index j = 0; j < data.features.cols(); ++j) {
    for (Eigen::Index r = 0; r < data.dim(); ++r) put_le<double>(out, data.features(r, j));
  }
  if (data.labels) {
    for (int label : *data.labels) put_le<std::int32_t>(out, label);
  }
}

Dataset load_dataset(const std::string& path) {
  const DatasetFormat fmt = format_from_path(path);
  std::ifstream in(path, fmt == DatasetFormat::Binary ? std::ios::binary : std::ios::in);
  if (!in) throw Error(ErrorKind::Config, "cannot open dataset '" + path + "'");
  return fmt == DatasetFormat::Csv ? read_csv(in, path) : read_binary(in, path);
}

void save_dataset(const std::string& path, const Dataset& data) {
  const DatasetFormat fmt = format_from_path(path);
  std::ofstream out(path, fmt == DatasetFormat::Binary ? std::ios::binary : std::ios::out);
  if (!out) throw Error(ErrorKind::Config, "cannot write dataset '" + path + "'");
  if (fmt == DatasetFormat::Csv) {
    write_csv(out, data);
  } else {
    write_binary(out, data);
  }
  if (!out) throw Error(ErrorKind::Config, "write failed for '" + path + "'");
}

NormalizePolicy parse_normalize_policy(const std::string& name) {
  if (name == "unit_length_columns" || name == "unit_length") return NormalizePolicy::UnitLengthColumns;
  if (name == "zscore_rows" || name == "zscore") return NormalizePolicy::ZscoreRows;
  if (name == "none") return NormalizePolicy::None;
  throw Error(ErrorKind::Config, "unknown normalization '" + name + "'");
}

std::string to_string(NormalizePolicy policy) {
  switch (policy) {
    case NormalizePolicy::UnitLengthColumns: return "unit_length_columns";
    case NormalizePolicy::ZscoreRows: return "zscore_rows";
    case NormalizePolicy::None: return "none";
  }
  return "none";
}

Normalized normalize(const Matrix& x, NormalizePolicy policy) {
  Normalized out{x, {}};
  switch (policy) {
    case NormalizePolicy::None:
      break;
    case NormalizePolicy::UnitLengthColumns:
      for (Eigen::Index j = 0; j < x.cols(); ++j) {
        const double norm = x.col(j).norm();
        if (norm > 0.0) {
          out.data.col(j) /= norm;
        } else {
          out.flagged.push_back(j);
        }
      }
      break;
    case NormalizePolicy::ZscoreRows: {
      const double n = static_cast<double>(x.cols());
      for (Eigen::Index r = 0; r < x.rows(); ++r) {
        auto row = out.data.row(r);
        const double mean = row.sum() / n;
        row.array() -= mean;
        const double sd = std::sqrt(row.squaredNorm() / n);
        if (sd > 1e-12 * std::max(1.0, std::abs(mean))) {
          row /= sd;
        } else {
          out.flagged.push_back(r);
        }
      }
      break;
    }
  }
  return out;
}

FeatureMatrix normalize(const FeatureMatrix& x, NormalizePolicy policy) {
  return FeatureMatrix(normalize(x.data(), policy).data, x.n_source());
}

void SynthTaskSpec::validate() const {
  auto fail = [](const std::string& msg) { throw Error(ErrorKind::InvalidSpec, msg); };
  if (classes < 2) fail("classes must be >= 2");
  if (dim < 1) fail("dim must be >= 1");
  if (source_per_class < 1 || target_per_class < 1) fail("samples per class must be >= 1");
  if (!means.empty() && static_cast<int>(means.size()) != classes) fail("one mean per class required");
  for (const Vector& mu : means) {
    if (mu.size() != dim) fail("mean vector length differs from dim");
  }
  if (!covariances.empty() && covariances.size() != 1 && static_cast<int>(covariances.size()) != classes) {
    fail("give one shared covariance or one per class");
  }
  for (std::size_t c = 0; c < covariances.size(); ++c) {
    const Matrix& cov = covariances[c];
    if (cov.rows() != dim || cov.cols() != dim) fail("covariance must be dim x dim");
    if (!cov.isApprox(cov.transpose(), 1e-12)) fail("covariance " + std::to_string(c + 1) + " is not symmetric");
    Eigen::LLT<Matrix> llt(cov);
    if (llt.info() != Eigen::Success) {
      fail("covariance " + std::to_string(c + 1) + " is not positive definite");
    }
  }
  if (covariances.empty() && !(noise > 0.0)) fail("noise must be > 0");
  if (translation.size() != 0 && translation.size() != dim) fail("translation length differs from dim");
  if (!std::isfinite(shift) || !std::isfinite(rotation) || !std::isfinite(separation)) {
    fail("shift, rotation and separation must be finite");
  }
}

SynthTask generate_synth(const SynthTaskSpec& spec) {
  spec.validate();
  const int m = spec.dim;
  std::vector<Vector> means = spec.means;
  if (means.empty()) {
    for (int c = 0; c < spec.classes; ++c) {
      Vector mu = Vector::Zero(m);
      mu(c % m) = spec.separation;
      means.push_back(std::move(mu));
    }
  }
  std::vector<Matrix> factors;
  for (int c = 0; c < spec.classes; ++c) {
    if (spec.covariances.empty()) {
      factors.push_back(spec.noise * Matrix::Identity(m, m));
    } else {
      const Matrix& cov = spec.covariances.size() == 1 ? spec.covariances[0] : spec.covariances[static_cast<std::size_t>(c)];
      factors.push_back(Eigen::LLT<Matrix>(cov).matrixL());
    }
  }
  Vector translation = spec.translation;
  if (translation.size() == 0) {
    translation = Vector::Constant(m, spec.shift / std::sqrt(static_cast<double>(m)));
  }
  Matrix rotation = Matrix::Identity(m, m);
  if (m >= 2) {
    const double cs = std::cos(spec.rotation);
    const double sn = std::sin(spec.rotation);
    rotation(0, 0) = cs;
    rotation(0, 1) = -sn;
    rotation(1, 0) = sn;
    rotation(1, 1) = cs;
  }

  std::mt19937_64 rng(spec.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  auto draw = [&](int c) {
    Vector e(m);
    for (int r = 0; r < m; ++r) e(r) = normal(rng);
    return Vector(means[static_cast<std::size_t>(c)] + factors[static_cast<std::size_t>(c)] * e);
  };

  const int ns = spec.classes * spec.source_per_class;
  const int nt = spec.classes * spec.target_per_class;
  Matrix x(m, ns + nt);
  Labels source(static_cast<std::size_t>(ns));
  Labels truth(static_cast<std::size_t>(nt));
  for (int i = 0; i < ns; ++i) {
    const int c = i % spec.classes;
    source[static_cast<std::size_t>(i)] = c;
    x.col(i) = draw(c);
  }
  for (int j = 0; j < nt; ++j) {
    const int c = j % spec.classes;
    truth[static_cast<std::size_t>(j)] = c;
    x.col(ns + j) = rotation * draw(c) + translation;
  }
  return SynthTask{FeatureMatrix(std::move(x), ns), std::move(source), std::move(truth)};
}

}  // namespace cdda
