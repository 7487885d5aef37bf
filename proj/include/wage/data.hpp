#pragma once

#include <string>
#include <vector>

#include "wage/fixedpoint.hpp"

namespace wage::data {

struct Dataset {
    int n = 0, h = 0, w = 0, c = 0;
    std::vector<uint8_t> images;  // n*h*w*c, HWC per sample
    std::vector<uint8_t> labels;  // n, class indices in [0, 10)

    int64_t sample_size() const { return int64_t(h) * w * c; }
};

struct Splits {
    Dataset train, test;
};

// Big-endian IDX files: train-images-idx3-ubyte etc. Throws DataError on a
// bad magic, truncated payload or dimension mismatch.
Splits load_mnist(const std::string& dir);
Dataset load_idx_pair(const std::string& images_path, const std::string& labels_path);
void save_idx_pair(const Dataset& ds, const std::string& images_path,
                   const std::string& labels_path);

// CIFAR-10 binary batches: 3073-byte records, label byte + channel-major
// pixels. data_batch_1..5.bin + test_batch.bin under dir.
Splits load_cifar10(const std::string& dir);
Dataset load_cifar_batches(const std::vector<std::string>& paths);
void save_cifar_batch(const Dataset& ds, const std::string& path);

// Pad 4 zero pixels on each side, crop a random h x w patch, flip
// horizontally with probability 1/2 (when allow_flip).
void augment_pad_crop_flip(const uint8_t* src, uint8_t* dst, int h, int w, int c,
                           bool allow_flip, Rng16& rng);

// Pixels [0,255] mapped linearly onto [-1,1] and quantized to the k_A grid
// (the input scaling layer has alpha = 1).
FixedPointTensor quantize_images(const uint8_t* imgs, int count, int h, int w, int c, int k_a);
FloatTensor real_images(const uint8_t* imgs, int count, int h, int w, int c);

// One-hot targets on the activation grid (hot class at the largest grid
// value) or as plain {0,1} reals.
FixedPointTensor one_hot_targets(const uint8_t* labels, int count, int classes, int k_a);
FloatTensor one_hot_targets_real(const uint8_t* labels, int count, int classes);

}  // namespace wage::data
