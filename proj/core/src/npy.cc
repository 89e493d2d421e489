#include "rateval/npy.h"

#include <bit>
#include <cctype>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <optional>
#include <string_view>
#include <system_error>

namespace rateval {
namespace {

constexpr std::string_view kMagic = "\x93NUMPY";
constexpr std::size_t kPreambleSize = 10;  // magic + version + u16 length
constexpr std::size_t kAlignment = 64;

[[noreturn]] void Malformed(const std::string& what) {
  throw Error(ErrorCode::kMalformedHeader, what);
}

// Minimal parser for the Python dict literal that forms an NPY header.
class HeaderParser {
 public:
  explicit HeaderParser(std::string_view text) : text_(text) {}

  void Parse(NpyHeader& header) {
    std::optional<std::string> descr;
    std::optional<bool> fortran_order;
    std::optional<std::vector<std::size_t>> shape;

    Expect('{');
    while (true) {
      SkipSpace();
      if (Peek() == '}') {
        ++pos_;
        break;
      }
      const std::string key = ParseString();
      Expect(':');
      if (key == "descr") {
        descr = ParseString();
      } else if (key == "fortran_order") {
        fortran_order = ParseBool();
      } else if (key == "shape") {
        shape = ParseTuple();
      } else {
        Malformed("unexpected header key '" + key + "'");
      }
      SkipSpace();
      if (Peek() == ',') {
        ++pos_;
      } else if (Peek() != '}') {
        Malformed("expected ',' or '}' in header");
      }
    }
    SkipSpace();
    if (pos_ != text_.size()) Malformed("trailing bytes after header dict");

    if (!descr || !fortran_order || !shape) {
      Malformed("header must define descr, fortran_order and shape");
    }
    if (*descr == "<f4") {
      header.dtype = DType::kFloat32;
    } else if (*descr == "<f8") {
      header.dtype = DType::kFloat64;
    } else {
      throw Error(ErrorCode::kUnsupportedDtype,
                  "descr '" + *descr + "' (expected '<f4' or '<f8')");
    }
    if (*fortran_order) {
      throw Error(ErrorCode::kUnsupportedLayout,
                  "fortran_order True is not supported");
    }
    header.shape = std::move(*shape);
  }

 private:
  char Peek() const { return pos_ < text_.size() ? text_[pos_] : '\0'; }

  void SkipSpace() {
    while (pos_ < text_.size() &&
           std::isspace(static_cast<unsigned char>(text_[pos_]))) {
      ++pos_;
    }
  }

  void Expect(char c) {
    SkipSpace();
    if (Peek() != c) Malformed(std::string("expected '") + c + "'");
    ++pos_;
  }

  std::string ParseString() {
    SkipSpace();
    const char quote = Peek();
    if (quote != '\'' && quote != '"') Malformed("expected a quoted string");
    const std::size_t end = text_.find(quote, pos_ + 1);
    if (end == std::string_view::npos) Malformed("unterminated string");
    std::string out(text_.substr(pos_ + 1, end - pos_ - 1));
    pos_ = end + 1;
    return out;
  }

  bool ParseBool() {
    SkipSpace();
    if (text_.substr(pos_, 4) == "True") {
      pos_ += 4;
      return true;
    }
    if (text_.substr(pos_, 5) == "False") {
      pos_ += 5;
      return false;
    }
    Malformed("expected True or False");
  }

  std::vector<std::size_t> ParseTuple() {
    Expect('(');
    std::vector<std::size_t> dims;
    while (true) {
      SkipSpace();
      if (Peek() == ')') {
        ++pos_;
        return dims;
      }
      if (!std::isdigit(static_cast<unsigned char>(Peek()))) {
        Malformed("expected a non-negative integer in shape");
      }
      std::size_t value = 0;
      while (std::isdigit(static_cast<unsigned char>(Peek()))) {
        const std::size_t digit = static_cast<std::size_t>(Peek() - '0');
        if (value > (SIZE_MAX - digit) / 10) Malformed("shape entry overflows");
        value = value * 10 + digit;
        ++pos_;
      }
      dims.push_back(value);
      SkipSpace();
      if (Peek() == ',') {
        ++pos_;
      } else if (Peek() != ')') {
        Malformed("expected ',' or ')' in shape");
      }
    }
  }

  std::string_view text_;
  std::size_t pos_ = 0;
};

template <typename T>
T LoadLittleEndian(const std::byte* src) {
  using U = std::conditional_t<sizeof(T) == 4, std::uint32_t, std::uint64_t>;
  U bits = 0;
  for (std::size_t i = 0; i < sizeof(U); ++i) {
    bits |= static_cast<U>(std::to_integer<unsigned>(src[i])) << (8 * i);
  }
  return std::bit_cast<T>(bits);
}

template <typename T>
void StoreLittleEndian(T value, char* dst) {
  using U = std::conditional_t<sizeof(T) == 4, std::uint32_t, std::uint64_t>;
  const U bits = std::bit_cast<U>(value);
  for (std::size_t i = 0; i < sizeof(U); ++i) {
    dst[i] = static_cast<char>((bits >> (8 * i)) & 0xFF);
  }
}

std::string BuildHeader(DType dtype, std::span<const std::size_t> shape) {
  std::string dict = "{'descr': '";
  dict += dtype == DType::kFloat32 ? "<f4" : "<f8";
  dict += "', 'fortran_order': False, 'shape': ";
  dict += ShapeString(shape);
  dict += ", }";
  // Pad with spaces so preamble + dict + '\n' is a multiple of 64 bytes.
  const std::size_t unpadded = kPreambleSize + dict.size() + 1;
  const std::size_t padded = (unpadded + kAlignment - 1) / kAlignment * kAlignment;
  dict.append(padded - unpadded, ' ');
  dict += '\n';

  std::string out(kMagic);
  out += static_cast<char>(1);
  out += static_cast<char>(0);
  out += static_cast<char>(dict.size() & 0xFF);
  out += static_cast<char>((dict.size() >> 8) & 0xFF);
  out += dict;
  return out;
}

template <std::size_t Rank>
std::string Serialize(const Tensor<Rank>& t) {
  std::string out = BuildHeader(t.dtype(), t.shape());
  const std::size_t item = ItemSize(t.dtype());
  const std::size_t offset = out.size();
  out.resize(offset + t.size() * item);
  char* dst = out.data() + offset;
  for (double v : t.data()) {
    if (t.dtype() == DType::kFloat32) {
      StoreLittleEndian(static_cast<float>(v), dst);
    } else {
      StoreLittleEndian(v, dst);
    }
    dst += item;
  }
  return out;
}

template <std::size_t Rank>
Tensor<Rank> Decode(const NpyHeader& header, std::span<const std::byte> bytes) {
  typename Tensor<Rank>::Shape shape;
  std::size_t volume = 1;
  for (std::size_t i = 0; i < Rank; ++i) {
    shape[i] = header.shape[i];
    if (shape[i] == 0) {
      throw Error(ErrorCode::kInvalidShape, "shape entries must be >= 1");
    }
    if (volume > SIZE_MAX / shape[i]) {
      throw Error(ErrorCode::kInvalidShape, "shape volume overflows");
    }
    volume *= shape[i];
  }
  const std::size_t item = ItemSize(header.dtype);
  const std::size_t available = bytes.size() - header.data_offset;
  if (volume > available / item) {
    throw Error(ErrorCode::kTruncatedPayload,
                "payload holds " + std::to_string(available) +
                    " bytes, shape " + ShapeString(header.shape) + " needs " +
                    std::to_string(volume) + " items of " +
                    std::to_string(item) + " bytes");
  }
  std::vector<double> data(volume);
  const std::byte* src = bytes.data() + header.data_offset;
  for (std::size_t i = 0; i < volume; ++i, src += item) {
    data[i] = header.dtype == DType::kFloat32
                  ? static_cast<double>(LoadLittleEndian<float>(src))
                  : LoadLittleEndian<double>(src);
  }
  return Tensor<Rank>(shape, std::move(data), header.dtype);
}

template <typename F>
auto WithPath(const std::filesystem::path& path, F&& f) {
  try {
    return f();
  } catch (const Error& e) {
    throw Error(e.code(), path.string() + ": " + e.detail());
  }
}

}  // namespace

NpyHeader ParseNpyHeader(std::span<const std::byte> bytes) {
  if (bytes.size() < kMagic.size() ||
      std::memcmp(bytes.data(), kMagic.data(), kMagic.size()) != 0) {
    throw Error(ErrorCode::kMagicMismatch, "file does not start with \\x93NUMPY");
  }
  if (bytes.size() < kPreambleSize) {
    throw Error(ErrorCode::kMalformedHeader, "file too short for NPY preamble");
  }
  const auto major = std::to_integer<unsigned>(bytes[6]);
  const auto minor = std::to_integer<unsigned>(bytes[7]);
  if (major != 1 || minor != 0) {
    throw Error(ErrorCode::kUnsupportedVersion,
                "NPY version " + std::to_string(major) + "." +
                    std::to_string(minor) + " (only 1.0 is supported)");
  }
  const std::size_t header_len = std::to_integer<std::size_t>(bytes[8]) |
                                 (std::to_integer<std::size_t>(bytes[9]) << 8);
  if (bytes.size() < kPreambleSize + header_len) {
    throw Error(ErrorCode::kMalformedHeader, "header length exceeds file size");
  }
  std::string_view text(reinterpret_cast<const char*>(bytes.data()) + kPreambleSize,
                        header_len);
  if (text.empty() || text.back() != '\n') {
    throw Error(ErrorCode::kMalformedHeader, "header not terminated by newline");
  }
  NpyHeader header;
  HeaderParser(text).Parse(header);
  header.data_offset = kPreambleSize + header_len;
  return header;
}

AnyTensor ParseNpy(std::span<const std::byte> bytes) {
  const NpyHeader header = ParseNpyHeader(bytes);
  switch (header.shape.size()) {
    case 2: return Decode<2>(header, bytes);
    case 3: return Decode<3>(header, bytes);
    default:
      throw Error(ErrorCode::kUnsupportedRank,
                  "shape " + ShapeString(header.shape) +
                      " has rank " + std::to_string(header.shape.size()) +
                      " (expected 2 or 3)");
  }
}

std::string SerializeNpy(const Tensor2D& t) { return Serialize(t); }
std::string SerializeNpy(const Tensor3D& t) { return Serialize(t); }

NpyHeader ReadNpyHeader(const std::filesystem::path& path) {
  return WithPath(path, [&] {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::kIoFailure, "cannot open for reading");
    std::vector<std::byte> buf(kPreambleSize);
    in.read(reinterpret_cast<char*>(buf.data()), kPreambleSize);
    buf.resize(static_cast<std::size_t>(in.gcount()));
    if (buf.size() == kPreambleSize) {
      const std::size_t header_len = std::to_integer<std::size_t>(buf[8]) |
                                     (std::to_integer<std::size_t>(buf[9]) << 8);
      buf.resize(kPreambleSize + header_len);
      in.read(reinterpret_cast<char*>(buf.data()) + kPreambleSize,
              static_cast<std::streamsize>(header_len));
      buf.resize(kPreambleSize + static_cast<std::size_t>(in.gcount()));
    }
    return ParseNpyHeader(buf);
  });
}

AnyTensor ReadNpy(const std::filesystem::path& path) {
  return WithPath(path, [&] { return ParseNpy(ReadFileBytes(path)); });
}

Tensor2D ReadNpy2D(const std::filesystem::path& path) {
  AnyTensor any = ReadNpy(path);
  if (auto* t = std::get_if<Tensor2D>(&any)) return std::move(*t);
  throw Error(ErrorCode::kUnsupportedRank,
              path.string() + ": expected a 2-D array, found shape " +
                  ShapeString(std::get<Tensor3D>(any)));
}

Tensor3D ReadNpy3D(const std::filesystem::path& path) {
  AnyTensor any = ReadNpy(path);
  if (auto* t = std::get_if<Tensor3D>(&any)) return std::move(*t);
  throw Error(ErrorCode::kUnsupportedRank,
              path.string() + ": expected a 3-D array, found shape " +
                  ShapeString(std::get<Tensor2D>(any)));
}

void WriteNpy(const Tensor2D& t, const std::filesystem::path& path) {
  WriteFileAtomic(path, SerializeNpy(t));
}

void WriteNpy(const Tensor3D& t, const std::filesystem::path& path) {
  WriteFileAtomic(path, SerializeNpy(t));
}

std::vector<std::byte> ReadFileBytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary | std::ios::ate);
  if (!in) {
    throw Error(ErrorCode::kIoFailure, path.string() + ": cannot open for reading");
  }
  const std::streamsize size = in.tellg();
  in.seekg(0);
  std::vector<std::byte> bytes(static_cast<std::size_t>(size));
  if (!in.read(reinterpret_cast<char*>(bytes.data()), size)) {
    throw Error(ErrorCode::kIoFailure, path.string() + ": read failed");
  }
  return bytes;
}

void WriteFileAtomic(const std::filesystem::path& path, std::string_view data) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) {
      throw Error(ErrorCode::kIoFailure, tmp.string() + ": cannot open for writing");
    }
    out.write(data.data(), static_cast<std::streamsize>(data.size()));
    if (!out.flush()) {
      throw Error(ErrorCode::kIoFailure, tmp.string() + ": write failed");
    }
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    throw Error(ErrorCode::kIoFailure,
                path.string() + ": rename failed: " + ec.message());
  }
}

}  // namespace rateval
