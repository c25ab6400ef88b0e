#include "taco/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>
#include <string>

namespace taco {

static_assert(std::endian::native == std::endian::little,
              "checkpoint I/O assumes a little-endian host");

namespace {

constexpr std::uint32_t kDense = 0;
constexpr std::uint32_t kFactored = 1;

template <typename T>
void put(std::string& buf, T value) {
  char bytes[sizeof(T)];
  std::memcpy(bytes, &value, sizeof(T));
  buf.append(bytes, sizeof(T));
}

void put_rows(std::string& buf, const Matrix& m) {
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) put<double>(buf, m(i, j));
  }
}

class Reader {
 public:
  Reader(const std::string& buf, std::size_t end) : buf_(buf), end_(end) {}

  template <typename T>
  T get() {
    if (pos_ + sizeof(T) > end_) throw DataError("checkpoint is truncated");
    T value;
    std::memcpy(&value, buf_.data() + pos_, sizeof(T));
    pos_ += sizeof(T);
    return value;
  }

  Matrix get_rows(std::uint64_t rows, std::uint64_t cols) {
    if (rows != 0 && cols > (end_ - pos_) / sizeof(double) / rows) {
      throw DataError("checkpoint is truncated");
    }
    Matrix m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
      for (Eigen::Index j = 0; j < m.cols(); ++j) m(i, j) = get<double>();
    }
    return m;
  }

  std::size_t pos() const { return pos_; }

 private:
  const std::string& buf_;
  std::size_t end_;
  std::size_t pos_ = 0;
};

}  // namespace

Matrix Checkpoint::weights() const {
  if (const auto* dense = std::get_if<Model>(&model)) return dense->weights();
  return std::get<FactoredModel>(model).reconstruct();
}

std::uint64_t write_checkpoint(const std::filesystem::path& path,
                               const AnyModel& model,
                               std::uint64_t config_hash) {
  std::string buf(kCheckpointMagic, sizeof(kCheckpointMagic));
  put<std::uint32_t>(buf, kCheckpointVersion);
  if (const auto* dense = std::get_if<Model>(&model)) {
    put<std::uint32_t>(buf, kDense);
    put<std::uint64_t>(buf, config_hash);
    put<std::uint64_t>(buf, static_cast<std::uint64_t>(dense->n_users()));
    put<std::uint64_t>(buf, static_cast<std::uint64_t>(dense->dim()));
    put_rows(buf, dense->weights());
  } else {
    const auto& f = std::get<FactoredModel>(model);
    put<std::uint32_t>(buf, kFactored);
    put<std::uint64_t>(buf, config_hash);
    put<std::uint64_t>(buf, static_cast<std::uint64_t>(f.u().rows()));
    put<std::uint64_t>(buf, static_cast<std::uint64_t>(f.v().rows()));
    put<std::uint64_t>(buf, static_cast<std::uint64_t>(f.rank()));
    put_rows(buf, f.u());
    put_rows(buf, f.v());
  }
  const std::uint64_t checksum = fnv1a(buf.data(), buf.size());
  put<std::uint64_t>(buf, checksum);

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot open " + path.string() + " for writing");
  out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
  if (!out) throw DataError("failed writing " + path.string());
  return checksum;
}

Checkpoint read_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open checkpoint " + path.string());
  const std::string buf((std::istreambuf_iterator<char>(in)),
                        std::istreambuf_iterator<char>());
  const std::size_t header = sizeof(kCheckpointMagic) + 2 * sizeof(std::uint32_t);
  if (buf.size() < header + sizeof(std::uint64_t)) {
    throw DataError(path.string() + ": checkpoint is truncated");
  }
  if (std::memcmp(buf.data(), kCheckpointMagic, sizeof(kCheckpointMagic)) !=
      0) {
    throw DataError(path.string() + ": not a checkpoint (bad magic)");
  }
  const std::size_t body = buf.size() - sizeof(std::uint64_t);
  std::uint64_t stored;
  std::memcpy(&stored, buf.data() + body, sizeof(stored));
  if (stored != fnv1a(buf.data(), body)) {
    throw DataError(path.string() + ": checkpoint checksum mismatch");
  }

  Reader r(buf, body);
  for (std::size_t i = 0; i < sizeof(kCheckpointMagic); ++i) r.get<char>();
  const auto version = r.get<std::uint32_t>();
  if (version != kCheckpointVersion) {
    throw DataError(path.string() + ": unsupported checkpoint version " +
                    std::to_string(version));
  }
  const auto kind = r.get<std::uint32_t>();
  Checkpoint ck;
  ck.config_hash = r.get<std::uint64_t>();
  ck.checksum = stored;
  const auto n = r.get<std::uint64_t>();
  const auto d = r.get<std::uint64_t>();
  if (kind == kDense) {
    ck.model = Model(r.get_rows(n, d));
  } else if (kind == kFactored) {
    const auto k = r.get<std::uint64_t>();
    Matrix u = r.get_rows(n, k);
    Matrix v = r.get_rows(d, k);
    ck.model = FactoredModel(std::move(u), std::move(v));
  } else {
    throw DataError(path.string() + ": unknown checkpoint kind");
  }
  if (r.pos() != body) {
    throw DataError(path.string() + ": trailing bytes in checkpoint");
  }
  return ck;
}

}  // namespace taco
