#include "wage/data.hpp"

#include <array>
#include <cstring>
#include <fstream>

namespace wage::data {

namespace {

constexpr uint32_t kImagesMagic = 0x00000803;
constexpr uint32_t kLabelsMagic = 0x00000801;

uint32_t read_be32(std::istream& in, const std::string& what) {
    std::array<unsigned char, 4> b;
    if (!in.read(reinterpret_cast<char*>(b.data()), 4))
        throw DataError("truncated file while reading " + what);
    return (uint32_t(b[0]) << 24) | (uint32_t(b[1]) << 16) | (uint32_t(b[2]) << 8) | b[3];
}

void write_be32(std::ostream& out, uint32_t v) {
    const std::array<unsigned char, 4> b = {
        static_cast<unsigned char>(v >> 24), static_cast<unsigned char>(v >> 16),
        static_cast<unsigned char>(v >> 8), static_cast<unsigned char>(v)};
    out.write(reinterpret_cast<const char*>(b.data()), 4);
}

std::ifstream open_binary(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw DataError("cannot open " + path);
    return f;
}

}  // namespace

Dataset load_idx_pair(const std::string& images_path, const std::string& labels_path) {
    Dataset ds;
    {
        auto f = open_binary(images_path);
        if (read_be32(f, "magic") != kImagesMagic)
            throw DataError("bad IDX image magic in " + images_path);
        ds.n = static_cast<int>(read_be32(f, "count"));
        ds.h = static_cast<int>(read_be32(f, "rows"));
        ds.w = static_cast<int>(read_be32(f, "cols"));
        ds.c = 1;
        if (ds.n <= 0 || ds.h <= 0 || ds.w <= 0)
            throw DataError("bad IDX dimensions in " + images_path);
        ds.images.resize(size_t(ds.n) * ds.h * ds.w);
        if (!f.read(reinterpret_cast<char*>(ds.images.data()),
                    static_cast<std::streamsize>(ds.images.size())))
            throw DataError("truncated IDX image payload in " + images_path);
    }
    {
        auto f = open_binary(labels_path);
        if (read_be32(f, "magic") != kLabelsMagic)
            throw DataError("bad IDX label magic in " + labels_path);
        const auto n = static_cast<int>(read_be32(f, "count"));
        if (n != ds.n)
            throw DataError("image/label count mismatch: " + images_path);
        ds.labels.resize(size_t(n));
        if (!f.read(reinterpret_cast<char*>(ds.labels.data()), n))
            throw DataError("truncated IDX label payload in " + labels_path);
    }
    for (uint8_t l : ds.labels)
        if (l >= 10) throw DataError("label out of range in " + labels_path);
    return ds;
}

void save_idx_pair(const Dataset& ds, const std::string& images_path,
                   const std::string& labels_path) {
    {
        std::ofstream f(images_path, std::ios::binary);
        if (!f) throw DataError("cannot write " + images_path);
        write_be32(f, kImagesMagic);
        write_be32(f, static_cast<uint32_t>(ds.n));
        write_be32(f, static_cast<uint32_t>(ds.h));
        write_be32(f, static_cast<uint32_t>(ds.w));
        f.write(reinterpret_cast<const char*>(ds.images.data()),
                static_cast<std::streamsize>(ds.images.size()));
    }
    {
        std::ofstream f(labels_path, std::ios::binary);
        if (!f) throw DataError("cannot write " + labels_path);
        write_be32(f, kLabelsMagic);
        write_be32(f, static_cast<uint32_t>(ds.n));
        f.write(reinterpret_cast<const char*>(ds.labels.data()),
                static_cast<std::streamsize>(ds.labels.size()));
    }
}

Splits load_mnist(const std::string& dir) {
    Splits s;
    s.train = load_idx_pair(dir + "/train-images-idx3-ubyte", dir + "/train-labels-idx1-ubyte");
    s.test = load_idx_pair(dir + "/t10k-images-idx3-ubyte", dir + "/t10k-labels-idx1-ubyte");
    if (s.train.h != 28 || s.train.w != 28)
        throw DataError("unexpected MNIST geometry");
    return s;
}

Dataset load_cifar_batches(const std::vector<std::string>& paths) {
    constexpr int kH = 32, kW = 32, kC = 3;
    constexpr int kRecord = 1 + kH * kW * kC;
    Dataset ds;
    ds.h = kH;
    ds.w = kW;
    ds.c = kC;
    for (const auto& path : paths) {
        auto f = open_binary(path);
        f.seekg(0, std::ios::end);
        const auto bytes = static_cast<int64_t>(f.tellg());
        if (bytes <= 0 || bytes % kRecord != 0)
            throw DataError("CIFAR batch size is not a multiple of 3073 bytes: " + path);
        const auto count = static_cast<int>(bytes / kRecord);
        f.seekg(0);
        std::vector<uint8_t> rec(kRecord);
        for (int i = 0; i < count; ++i) {
            if (!f.read(reinterpret_cast<char*>(rec.data()), kRecord))
                throw DataError("truncated CIFAR record in " + path);
            if (rec[0] >= 10) throw DataError("CIFAR label out of range in " + path);
            ds.labels.push_back(rec[0]);
            // channel-major record -> interleaved HWC
            const size_t base = ds.images.size();
            ds.images.resize(base + size_t(kH) * kW * kC);
            for (int ch = 0; ch < kC; ++ch)
                for (int p = 0; p < kH * kW; ++p)
                    ds.images[base + size_t(p) * kC + ch] = rec[1 + ch * kH * kW + p];
        }
        ds.n += count;
    }
    return ds;
}

void save_cifar_batch(const Dataset& ds, const std::string& path) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw DataError("cannot write " + path);
    const int hw = ds.h * ds.w;
    std::vector<uint8_t> rec(1 + size_t(hw) * ds.c);
    for (int i = 0; i < ds.n; ++i) {
        rec[0] = ds.labels[i];
        const uint8_t* img = ds.images.data() + size_t(i) * hw * ds.c;
        for (int ch = 0; ch < ds.c; ++ch)
            for (int p = 0; p < hw; ++p) rec[1 + size_t(ch) * hw + p] = img[size_t(p) * ds.c + ch];
        f.write(reinterpret_cast<const char*>(rec.data()),
                static_cast<std::streamsize>(rec.size()));
    }
}

Splits load_cifar10(const std::string& dir) {
    std::vector<std::string> train_paths;
    for (int i = 1; i <= 5; ++i) train_paths.push_back(dir + "/data_batch_" + std::to_string(i) + ".bin");
    Splits s;
    s.train = load_cifar_batches(train_paths);
    s.test = load_cifar_batches({dir + "/test_batch.bin"});
    return s;
}

void augment_pad_crop_flip(const uint8_t* src, uint8_t* dst, int h, int w, int c,
                           bool allow_flip, Rng16& rng) {
    constexpr int kPad = 4;
    const int oy = static_cast<int>(rng.bounded(2 * kPad + 1));
    const int ox = static_cast<int>(rng.bounded(2 * kPad + 1));
    const bool flip = allow_flip && (rng.next16() & 1u);
    for (int y = 0; y < h; ++y) {
        const int sy = y + oy - kPad;
        for (int x = 0; x < w; ++x) {
            const int xx = flip ? (w - 1 - x) : x;
            const int sx = xx + ox - kPad;
            uint8_t* d = dst + (size_t(y) * w + x) * c;
            if (sy < 0 || sy >= h || sx < 0 || sx >= w) {
                std::memset(d, 0, size_t(c));
            } else {
                std::memcpy(d, src + (size_t(sy) * w + sx) * c, size_t(c));
            }
        }
    }
}

FixedPointTensor quantize_images(const uint8_t* imgs, int count, int h, int w, int c, int k_a) {
    std::array<int16_t, 256> lut;
    for (int p = 0; p < 256; ++p)
        lut[p] = static_cast<int16_t>(quantize_code(2.0 * p / 255.0 - 1.0, k_a));
    FixedPointTensor out({count, h, w, c}, k_a);
    const int64_t per = int64_t(h) * w * c;
#pragma omp parallel for schedule(static)
    for (int64_t i = 0; i < count * per; ++i) out.codes[i] = lut[imgs[i]];
    return out;
}

FloatTensor real_images(const uint8_t* imgs, int count, int h, int w, int c) {
    FloatTensor out({count, h, w, c});
    for (int64_t i = 0; i < out.size(); ++i) out.v[i] = 2.0 * imgs[i] / 255.0 - 1.0;
    return out;
}

FixedPointTensor one_hot_targets(const uint8_t* labels, int count, int classes, int k_a) {
    FixedPointTensor out({count, classes}, k_a);
    const auto hot = static_cast<int16_t>(max_code(k_a));
    for (int i = 0; i < count; ++i) out.codes[int64_t(i) * classes + labels[i]] = hot;
    return out;
}

FloatTensor one_hot_targets_real(const uint8_t* labels, int count, int classes) {
    FloatTensor out({count, classes});
    for (int i = 0; i < count; ++i) out.v[int64_t(i) * classes + labels[i]] = 1.0;
    return out;
}

}  // namespace wage::data
