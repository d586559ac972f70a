#include "bodyfit/features/feature_vector.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>

#include "bodyfit/error.hpp"

namespace bodyfit {

static_assert(kFeatureDim == 501);
static_assert(std::endian::native == std::endian::little, "feature files are written little-endian");

void GroupWeights::validate() const {
  for (double w : {global, gender, local})
    if (!(w >= 0.0) || !std::isfinite(w)) fail(ErrorCode::InvalidArgument, "group weights must be finite and >= 0");
  if (global == 0.0 && gender == 0.0 && local == 0.0) fail(ErrorCode::InvalidArgument, "group weights are all zero");
}

FeatureVector assemble_feature_vector(const Measurements& m, const GenderRatios& r, const JointDescriptors& fpfh,
                                      const GroupWeights& w) {
  w.validate();
  for (std::size_t j = 0; j < kJointCount; ++j)
    if (!fpfh[j])
      fail(ErrorCode::MissingDescriptor,
           "no FPFH descriptor for joint " + std::string(joint_name(static_cast<JointId>(j))));
  FeatureVector f;
  f.weights = w;
  const double global[4] = {m.height, m.sleeve_length, m.leg_length, m.shoulder_length};
  for (std::size_t i = 0; i < kGlobalCount; ++i) f.values[kGlobalOffset + i] = static_cast<float>(w.global * global[i] / 100.0);
  f.values[kGenderOffset] = static_cast<float>(w.gender * r.ratio1);
  f.values[kGenderOffset + 1] = static_cast<float>(w.gender * r.ratio2);
  for (std::size_t j = 0; j < kJointCount; ++j)
    for (int b = 0; b < kFpfhSize; ++b)
      f.values[kLocalOffset + j * kFpfhSize + b] = static_cast<float>(w.local * fpfh[j]->bins[b]);
  for (float v : f.values)
    if (!std::isfinite(v)) fail(ErrorCode::InvalidArgument, "feature vector has non-finite entries");
  return f;
}

FeatureVector reweighted(const FeatureVector& f, const GroupWeights& w) {
  w.validate();
  FeatureVector out = f;
  out.weights = w;
  const auto scale = [&](std::size_t off, std::size_t n, double from, double to) {
    const double k = from == 0.0 ? 0.0 : to / from;
    for (std::size_t i = off; i < off + n; ++i) out.values[i] = static_cast<float>(f.values[i] * k);
  };
  scale(kGlobalOffset, kGlobalCount, f.weights.global, w.global);
  scale(kGenderOffset, kGenderCount, f.weights.gender, w.gender);
  scale(kLocalOffset, kLocalCount, f.weights.local, w.local);
  return out;
}

namespace {

constexpr char kMagic[4] = {'I', 'M', 'F', 'V'};
constexpr std::uint16_t kVersion = 1;
constexpr std::size_t kEncodedSize = 4 + 2 + 2 + 4 * kFeatureDim + 4 * 3;

template <typename T>
void put(std::vector<std::uint8_t>& out, T v) {
  std::uint8_t b[sizeof(T)];
  std::memcpy(b, &v, sizeof(T));
  out.insert(out.end(), b, b + sizeof(T));
}

template <typename T>
T get(const std::uint8_t* p) {
  T v;
  std::memcpy(&v, p, sizeof(T));
  return v;
}

}  // namespace

std::vector<std::uint8_t> encode_feature_vector(const FeatureVector& f) {
  std::vector<std::uint8_t> out;
  out.reserve(kEncodedSize);
  out.insert(out.end(), kMagic, kMagic + 4);
  put<std::uint16_t>(out, kVersion);
  put<std::uint16_t>(out, static_cast<std::uint16_t>(kFeatureDim));
  for (float v : f.values) put<float>(out, v);
  put<float>(out, static_cast<float>(f.weights.global));
  put<float>(out, static_cast<float>(f.weights.gender));
  put<float>(out, static_cast<float>(f.weights.local));
  return out;
}

FeatureVector decode_feature_vector(const std::vector<std::uint8_t>& bytes) {
  if (bytes.size() < 8 || std::memcmp(bytes.data(), kMagic, 4) != 0)
    fail(ErrorCode::Format, "not a feature vector file (bad magic)");
  const auto version = get<std::uint16_t>(bytes.data() + 4);
  const auto dim = get<std::uint16_t>(bytes.data() + 6);
  if (version != kVersion) fail(ErrorCode::Format, "unsupported feature vector version " + std::to_string(version));
  if (dim != kFeatureDim) fail(ErrorCode::DimensionMismatch, "feature dimension " + std::to_string(dim));
  if (bytes.size() != kEncodedSize) fail(ErrorCode::Format, "feature vector file has the wrong size");
  FeatureVector f;
  const std::uint8_t* p = bytes.data() + 8;
  for (std::size_t i = 0; i < kFeatureDim; ++i, p += 4) f.values[i] = get<float>(p);
  f.weights.global = get<float>(p);
  f.weights.gender = get<float>(p + 4);
  f.weights.local = get<float>(p + 8);
  return f;
}

void write_feature_vector(const std::filesystem::path& path, const FeatureVector& f) {
  const auto bytes = encode_feature_vector(f);
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorCode::Io, "cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) fail(ErrorCode::Io, "write failed for " + path.string());
}

FeatureVector read_feature_vector(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::Io, "cannot open " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  try {
    return decode_feature_vector(bytes);
  } catch (const Error& e) {
    throw e.with_context(path.string());
  }
}

}  // namespace bodyfit
