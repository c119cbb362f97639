#include "cubepose/tensor.hpp"

#include <bit>
#include <cmath>
#include <cstdint>
#include <istream>
#include <iterator>
#include <ostream>
#include <sstream>

#include "cubepose/error.hpp"
#include "cubepose/io.hpp"
#include "json.hpp"

namespace cubepose {

namespace {

using ordered_json = nlohmann::ordered_json;

std::string section_header(const Tensor& t) {
  ordered_json h;
  h["shape"] = {t.height, t.width, t.channels};
  h["dtype"] = "f32";
  h["order"] = "row-major";
  h["byte_order"] = "little";
  return h.dump();
}

void append_le(std::string& out, float value) {
  const auto bits = std::bit_cast<std::uint32_t>(value);
  for (int i = 0; i < 4; ++i) {
    out.push_back(static_cast<char>((bits >> (8 * i)) & 0xFFu));
  }
}

float read_le(const char* p) {
  std::uint32_t bits = 0;
  for (int i = 0; i < 4; ++i) {
    bits |= std::uint32_t(static_cast<unsigned char>(p[i])) << (8 * i);
  }
  return std::bit_cast<float>(bits);
}

[[noreturn]] void parse_error(std::size_t offset, const std::string& msg) {
  throw Error(ErrorCode::kParse, "tmap: " + msg + " (byte offset " + std::to_string(offset) + ")");
}

nlohmann::json parse_json_line(const std::string& text, std::size_t offset) {
  try {
    return nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    parse_error(offset, std::string("malformed JSON header: ") + e.what());
  }
}

const char* kNames[] = {"center_heat", "center_off", "box_size", "kp_heat", "kp_off", "kp_disp", "dims"};

}  // namespace

const Tensor* TensorFile::find(const std::string& name) const {
  for (const auto& t : tensors) {
    if (t.name == name) {
      return &t.tensor;
    }
  }
  return nullptr;
}

void write_tensor_file(std::ostream& out, const TensorFile& file) {
  std::string body;
  ordered_json manifest;
  manifest["format"] = "tmap";
  manifest["version"] = 1;
  manifest["stride"] = file.stride;
  manifest["tensors"] = ordered_json::array();
  for (const auto& [name, t] : file.tensors) {
    if (t.data.size() != std::size_t(t.height) * t.width * t.channels) {
      throw Error(ErrorCode::kInvalidArgument, "tensor '" + name + "' data does not match its shape");
    }
    const std::size_t offset = body.size();
    body += section_header(t);
    body.push_back('\n');
    body.reserve(body.size() + 4 * t.data.size());
    for (float v : t.data) {
      append_le(body, v);
    }
    ordered_json entry;
    entry["name"] = name;
    entry["offset"] = offset;
    entry["length"] = body.size() - offset;
    manifest["tensors"].push_back(entry);
  }
  out << manifest.dump() << '\n';
  out.write(body.data(), static_cast<std::streamsize>(body.size()));
  if (!out) {
    throw Error(ErrorCode::kIo, "tmap: write failed");
  }
}

TensorFile read_tensor_file(std::istream& in) {
  const std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  const std::size_t nl = bytes.find('\n');
  if (nl == std::string::npos) {
    parse_error(bytes.size(), "missing manifest line");
  }
  const nlohmann::json manifest = parse_json_line(bytes.substr(0, nl), 0);
  const std::size_t data_start = nl + 1;

  TensorFile file;
  try {
    if (manifest.at("format").get<std::string>() != "tmap") {
      parse_error(0, "not a tmap file");
    }
    file.stride = manifest.at("stride").get<int>();
    for (const auto& entry : manifest.at("tensors")) {
      const auto name = entry.at("name").get<std::string>();
      const auto offset = entry.at("offset").get<std::size_t>();
      const auto length = entry.at("length").get<std::size_t>();
      const std::size_t begin = data_start + offset;
      if (begin > bytes.size()) {
        parse_error(begin, "section '" + name + "' starts past end of file");
      }
      const std::size_t header_end = bytes.find('\n', begin);
      if (header_end == std::string::npos) {
        parse_error(begin, "section '" + name + "' has no header line");
      }
      const nlohmann::json header = parse_json_line(bytes.substr(begin, header_end - begin), begin);
      if (header.at("dtype") != "f32" || header.at("order") != "row-major" ||
          header.at("byte_order") != "little") {
        parse_error(begin, "section '" + name + "' has an unsupported layout");
      }
      const auto shape = header.at("shape").get<std::vector<long long>>();
      if (shape.size() != 3 || shape[0] < 0 || shape[1] < 0 || shape[2] < 0) {
        parse_error(begin, "section '" + name + "' has an invalid shape");
      }
      Tensor t(static_cast<int>(shape[0]), static_cast<int>(shape[1]), static_cast<int>(shape[2]));
      const std::size_t payload = 4 * t.data.size();
      const std::size_t header_len = header_end + 1 - begin;
      if (length != header_len + payload) {
        parse_error(begin, "section '" + name + "' length " + std::to_string(length) +
                               " does not match header (" + std::to_string(header_len + payload) + ")");
      }
      const std::size_t available = bytes.size() - (header_end + 1);
      if (available < payload) {
        throw Error(ErrorCode::kParse, "tmap: truncated section '" + name + "': expected " +
                                           std::to_string(payload) + " payload bytes, got " +
                                           std::to_string(available));
      }
      const char* p = bytes.data() + header_end + 1;
      for (std::size_t i = 0; i < t.data.size(); ++i) {
        t.data[i] = read_le(p + 4 * i);
      }
      file.tensors.push_back({name, std::move(t)});
    }
  } catch (const nlohmann::json::exception& e) {
    parse_error(0, std::string("bad manifest: ") + e.what());
  }
  return file;
}

TensorMaps TensorMaps::zeros(int height, int width, int stride, int kp_off_channels) {
  if (height <= 0 || width <= 0 || stride < 1) {
    throw Error(ErrorCode::kInvalidArgument, "maps need a positive size and stride");
  }
  if (kp_off_channels != 2 && kp_off_channels != 2 * kKeypoints) {
    throw Error(ErrorCode::kInvalidArgument, "kp_off must have 2 or 16 channels");
  }
  TensorMaps m;
  m.stride = stride;
  m.center_heat = Tensor(height, width, 1);
  m.center_off = Tensor(height, width, 2);
  m.box_size = Tensor(height, width, 2);
  m.kp_heat = Tensor(height, width, kKeypoints);
  m.kp_off = Tensor(height, width, kp_off_channels);
  m.kp_disp = Tensor(height, width, 2 * kKeypoints);
  m.dims = Tensor(height, width, 3);
  return m;
}

void TensorMaps::validate() const {
  if (stride < 1) {
    throw Error(ErrorCode::kInvalidArgument, "maps: stride must be >= 1");
  }
  const int h = height(), w = width();
  const struct {
    const Tensor* t;
    const char* name;
    int channels;
  } expected[] = {{&center_heat, "center_heat", 1}, {&center_off, "center_off", 2},
                  {&box_size, "box_size", 2},       {&kp_heat, "kp_heat", kKeypoints},
                  {&kp_off, "kp_off", -1},          {&kp_disp, "kp_disp", 2 * kKeypoints},
                  {&dims, "dims", 3}};
  for (const auto& e : expected) {
    const bool channels_ok = e.channels > 0 ? e.t->channels == e.channels
                                            : (e.t->channels == 2 || e.t->channels == 2 * kKeypoints);
    if (e.t->height != h || e.t->width != w || !channels_ok ||
        e.t->data.size() != std::size_t(h) * w * e.t->channels) {
      throw Error(ErrorCode::kInvalidArgument, std::string("maps: inconsistent shape for ") + e.name);
    }
  }
  for (const Tensor* heat : {&center_heat, &kp_heat}) {
    for (float v : heat->data) {
      if (!(v >= 0.0f && v <= 1.0f)) {
        throw Error(ErrorCode::kInvalidArgument, "maps: heat score outside [0, 1]");
      }
    }
  }
}

TensorFile TensorMaps::to_file() const {
  TensorFile f;
  f.stride = stride;
  const Tensor* parts[] = {&center_heat, &center_off, &box_size, &kp_heat, &kp_off, &kp_disp, &dims};
  for (int i = 0; i < 7; ++i) {
    f.tensors.push_back({kNames[i], *parts[i]});
  }
  return f;
}

TensorMaps TensorMaps::from_file(const TensorFile& file) {
  TensorMaps m;
  m.stride = file.stride;
  Tensor* parts[] = {&m.center_heat, &m.center_off, &m.box_size, &m.kp_heat, &m.kp_off, &m.kp_disp, &m.dims};
  for (int i = 0; i < 7; ++i) {
    const Tensor* t = file.find(kNames[i]);
    if (t == nullptr) {
      throw Error(ErrorCode::kParse, std::string("tmap: missing tensor '") + kNames[i] + "'");
    }
    *parts[i] = *t;
  }
  m.validate();
  return m;
}

TensorMaps read_maps(const std::string& path) {
  auto in = open_input(path, /*binary=*/true);
  return TensorMaps::from_file(read_tensor_file(*in));
}

void write_maps(const std::string& path, const TensorMaps& maps) {
  auto out = open_output(path, /*binary=*/true);
  write_tensor_file(*out, maps.to_file());
}

}  // namespace cubepose
