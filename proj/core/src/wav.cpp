#include "prcodec/wav.hpp"

#include <cstring>
#include <fstream>
#include <vector>

namespace prcodec {

namespace {

uint32_t read_u32le(const uint8_t* p) {
  return static_cast<uint32_t>(p[0]) | (static_cast<uint32_t>(p[1]) << 8) |
         (static_cast<uint32_t>(p[2]) << 16) | (static_cast<uint32_t>(p[3]) << 24);
}

uint16_t read_u16le(const uint8_t* p) {
  return static_cast<uint16_t>(p[0] | (p[1] << 8));
}

void put_u32le(std::vector<uint8_t>& out, uint32_t v) {
  out.push_back(static_cast<uint8_t>(v & 0xff));
  out.push_back(static_cast<uint8_t>((v >> 8) & 0xff));
  out.push_back(static_cast<uint8_t>((v >> 16) & 0xff));
  out.push_back(static_cast<uint8_t>((v >> 24) & 0xff));
}

void put_u16le(std::vector<uint8_t>& out, uint16_t v) {
  out.push_back(static_cast<uint8_t>(v & 0xff));
  out.push_back(static_cast<uint8_t>((v >> 8) & 0xff));
}

std::vector<uint8_t> read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open file: " + path);
  return std::vector<uint8_t>(std::istreambuf_iterator<char>(in),
                              std::istreambuf_iterator<char>());
}

}  // namespace

PcmSignal read_wav(const std::string& path) {
  const std::vector<uint8_t> data = read_file(path);
  if (data.size() < 44 || std::memcmp(data.data(), "RIFF", 4) != 0 ||
      std::memcmp(data.data() + 8, "WAVE", 4) != 0) {
    throw FormatError("not a RIFF/WAVE file: " + path);
  }

  uint16_t format = 0, channels = 0, bits = 0;
  uint32_t rate = 0;
  const uint8_t* pcm_data = nullptr;
  size_t pcm_bytes = 0;
  bool have_fmt = false;

  size_t pos = 12;
  while (pos + 8 <= data.size()) {
    const uint8_t* chunk = data.data() + pos;
    const uint32_t chunk_size = read_u32le(chunk + 4);
    const size_t body = pos + 8;
    if (body + chunk_size > data.size()) {
      throw FormatError("truncated WAV chunk in " + path);
    }
    if (std::memcmp(chunk, "fmt ", 4) == 0) {
      if (chunk_size < 16) throw FormatError("short fmt chunk in " + path);
      format = read_u16le(data.data() + body);
      channels = read_u16le(data.data() + body + 2);
      rate = read_u32le(data.data() + body + 4);
      bits = read_u16le(data.data() + body + 14);
      have_fmt = true;
    } else if (std::memcmp(chunk, "data", 4) == 0) {
      pcm_data = data.data() + body;
      pcm_bytes = chunk_size;
    }
    pos = body + chunk_size + (chunk_size & 1);  // chunks are word-aligned
  }

  if (!have_fmt || pcm_data == nullptr) {
    throw FormatError("missing fmt/data chunk in " + path);
  }
  if (format != 1 || bits != 16) {
    throw FormatError(path + ": only 16-bit PCM WAV is supported");
  }
  if (channels != 1) {
    throw FormatError(path + ": only mono input is supported (got " +
                      std::to_string(channels) + " channels)");
  }
  if (rate != kSampleRate) {
    throw FormatError(path + ": sample rate must be 16000 Hz (got " +
                      std::to_string(rate) + ")");
  }

  PcmSignal pcm;
  pcm.sample_rate = kSampleRate;
  pcm.samples.resize(pcm_bytes / 2);
  for (size_t i = 0; i < pcm.samples.size(); ++i) {
    pcm.samples[i] = static_cast<int16_t>(
        static_cast<uint16_t>(pcm_data[2 * i] | (pcm_data[2 * i + 1] << 8)));
  }
  return pcm;
}

void write_wav(const std::string& path, const PcmSignal& pcm) {
  const uint32_t data_bytes = static_cast<uint32_t>(pcm.samples.size() * 2);
  std::vector<uint8_t> out;
  out.reserve(44 + data_bytes);
  out.insert(out.end(), {'R', 'I', 'F', 'F'});
  put_u32le(out, 36 + data_bytes);
  out.insert(out.end(), {'W', 'A', 'V', 'E'});
  out.insert(out.end(), {'f', 'm', 't', ' '});
  put_u32le(out, 16);
  put_u16le(out, 1);  // PCM
  put_u16le(out, 1);  // mono
  put_u32le(out, kSampleRate);
  put_u32le(out, kSampleRate * 2);  // byte rate
  put_u16le(out, 2);                // block align
  put_u16le(out, 16);               // bits per sample
  out.insert(out.end(), {'d', 'a', 't', 'a'});
  put_u32le(out, data_bytes);
  for (int16_t s : pcm.samples) {
    const uint16_t u = static_cast<uint16_t>(s);
    out.push_back(static_cast<uint8_t>(u & 0xff));
    out.push_back(static_cast<uint8_t>(u >> 8));
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) throw FormatError("cannot write file: " + path);
  f.write(reinterpret_cast<const char*>(out.data()),
          static_cast<std::streamsize>(out.size()));
}

PcmSignal read_raw_pcm(const std::string& path) {
  const std::vector<uint8_t> data = read_file(path);
  if (data.size() % 2 != 0) {
    throw FormatError("raw PCM file has odd byte count: " + path);
  }
  PcmSignal pcm;
  pcm.sample_rate = kSampleRate;
  pcm.samples.resize(data.size() / 2);
  for (size_t i = 0; i < pcm.samples.size(); ++i) {
    pcm.samples[i] = static_cast<int16_t>(
        static_cast<uint16_t>(data[2 * i] | (data[2 * i + 1] << 8)));
  }
  return pcm;
}

}  // namespace prcodec
