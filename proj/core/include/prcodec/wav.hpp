// Minimal RIFF/WAVE I/O: 16-bit PCM, mono, 16 kHz only. Anything else is
// rejected with FormatError. Raw little-endian s16 ingestion is also
// supported for headerless corpora.
#pragma once

#include <string>

#include "prcodec/types.hpp"

namespace prcodec {

PcmSignal read_wav(const std::string& path);
void write_wav(const std::string& path, const PcmSignal& pcm);

// Headerless little-endian int16 mono at 16 kHz.
PcmSignal read_raw_pcm(const std::string& path);

}  // namespace prcodec
