// Minimal prototypes for the brotli 1.x C API entry points used by ccsim.
// The target system ships libbrotlienc/.dec runtime objects without the
// development headers, so the five functions used are declared here verbatim
// (signatures match brotli 1.0.x's encode.h/decode.h).
#pragma once

#include <cstddef>
#include <cstdint>

extern "C" {

typedef enum ccsim_BrotliEncoderMode {
  CCSIM_BROTLI_MODE_GENERIC = 0,
  CCSIM_BROTLI_MODE_TEXT = 1,
  CCSIM_BROTLI_MODE_FONT = 2
} ccsim_BrotliEncoderMode;

int BrotliEncoderCompress(int quality, int lgwin, ccsim_BrotliEncoderMode mode,
                          size_t input_size, const uint8_t* input_buffer,
                          size_t* encoded_size, uint8_t* encoded_buffer);

size_t BrotliEncoderMaxCompressedSize(size_t input_size);

typedef struct BrotliDecoderStateStruct BrotliDecoderState;

typedef enum ccsim_BrotliDecoderResult {
  CCSIM_BROTLI_DECODER_RESULT_ERROR = 0,
  CCSIM_BROTLI_DECODER_RESULT_SUCCESS = 1,
  CCSIM_BROTLI_DECODER_RESULT_NEEDS_MORE_INPUT = 2,
  CCSIM_BROTLI_DECODER_RESULT_NEEDS_MORE_OUTPUT = 3
} ccsim_BrotliDecoderResult;

BrotliDecoderState* BrotliDecoderCreateInstance(void* alloc_func,
                                                void* free_func, void* opaque);
void BrotliDecoderDestroyInstance(BrotliDecoderState* state);
ccsim_BrotliDecoderResult BrotliDecoderDecompressStream(
    BrotliDecoderState* state, size_t* available_in, const uint8_t** next_in,
    size_t* available_out, uint8_t** next_out, size_t* total_out);

}  // extern "C"
