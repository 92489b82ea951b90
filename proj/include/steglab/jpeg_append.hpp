#pragma once

#include <cstdint>
#include <vector>

namespace steglab {

/// Result of scanning a JPEG for data smuggled after the end-of-image marker.
struct JpegAppendVerdict {
    bool appended = false;
    size_t offset = 0;  // byte offset where the appended data begins
    bool is_rar = false;
};

/// Scans raw JPEG bytes for payload appended after the final FF D9 (EOI)
/// marker. The last occurrence is used so that embedded thumbnails, which
/// carry their own EOI, do not trigger a false report. Trailing bytes that
/// are all zero count as padding, not payload.
///
/// Throws if the bytes do not start with the JPEG SOI marker or contain no
/// EOI marker at all.
JpegAppendVerdict jpeg_append_detect(const std::vector<uint8_t>& file_bytes);

}  // namespace steglab
