#ifndef SEQ2SLATE_CHECKPOINT_H_
#define SEQ2SLATE_CHECKPOINT_H_

#include <string>

#include "seq2slate/model.h"

namespace seq2slate {

/// Binary checkpoint layout (all integers little-endian):
///   magic "S2SL" (4 bytes)
///   format version  u32 (currently 1)
///   m_raw, m, rho   u32 each
///   one record per parameter tensor, in the PointerNetParams
///   for_each_tensor order: u32 element count, then that many IEEE-754
///   float64 values
///   CRC32 (zlib polynomial) of every preceding byte, u32
/// The layout is bit-exact: save -> load -> save reproduces the file.
inline constexpr uint32_t kCheckpointVersion = 1;

void save_checkpoint(const PointerNetParams& params, const std::string& path);
PointerNetParams load_checkpoint(const std::string& path);

}  // namespace seq2slate

#endif  // SEQ2SLATE_CHECKPOINT_H_
