#include "hpcal/wav.hpp"

#include "hpcal/errors.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <string>

namespace hpcal::wav {

namespace {

constexpr std::uint16_t kFormatPcm = 1;
constexpr std::uint16_t kFormatFloat = 3;
constexpr std::uint16_t kFormatExtensible = 0xFFFE;

class Reader {
public:
    explicit Reader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

    std::size_t remaining() const { return bytes_.size() - pos_; }
    std::size_t position() const { return pos_; }

    void need(std::size_t n) const {
        if (remaining() < n) throw ConfigError("truncated WAV data");
    }
    std::uint16_t u16() {
        need(2);
        std::uint16_t v = bytes_[pos_] | (bytes_[pos_ + 1] << 8);
        pos_ += 2;
        return v;
    }
    std::uint32_t u32() {
        need(4);
        std::uint32_t v = 0;
        for (int i = 3; i >= 0; --i) v = (v << 8) | bytes_[pos_ + i];
        pos_ += 4;
        return v;
    }
    std::string tag() {
        need(4);
        std::string t(reinterpret_cast<const char*>(bytes_.data() + pos_), 4);
        pos_ += 4;
        return t;
    }
    void skip(std::size_t n) {
        need(n);
        pos_ += n;
    }
    std::span<const std::uint8_t> take(std::size_t n) {
        need(n);
        auto s = bytes_.subspan(pos_, n);
        pos_ += n;
        return s;
    }

private:
    std::span<const std::uint8_t> bytes_;
    std::size_t pos_ = 0;
};

double sample_at(const std::uint8_t* p, SampleFormat format) {
    switch (format) {
        case SampleFormat::Pcm16: {
            const auto v = static_cast<std::int16_t>(p[0] | (p[1] << 8));
            return v / 32768.0;
        }
        case SampleFormat::Pcm24: {
            std::int32_t v = p[0] | (p[1] << 8) | (p[2] << 16);
            if (v & 0x800000) v -= 0x1000000;
            return v / 8388608.0;
        }
        case SampleFormat::Float32: {
            std::uint32_t bits = p[0] | (p[1] << 8) | (p[2] << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
            return static_cast<double>(std::bit_cast<float>(bits));
        }
    }
    return 0.0;
}

int bytes_per_sample(SampleFormat format) {
    return format == SampleFormat::Pcm16 ? 2 : format == SampleFormat::Pcm24 ? 3 : 4;
}

void put_u16(std::vector<std::uint8_t>& out, std::uint16_t v) {
    out.push_back(v & 0xFF);
    out.push_back(v >> 8);
}

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back((v >> (8 * i)) & 0xFF);
}

void put_tag(std::vector<std::uint8_t>& out, const char* t) { out.insert(out.end(), t, t + 4); }

void put_sample(std::vector<std::uint8_t>& out, double x, SampleFormat format) {
    switch (format) {
        case SampleFormat::Pcm16: {
            const auto v = static_cast<std::int32_t>(std::lround(std::clamp(x, -1.0, 1.0) * 32768.0));
            put_u16(out, static_cast<std::uint16_t>(std::clamp(v, -32768, 32767)));
            break;
        }
        case SampleFormat::Pcm24: {
            const auto v = static_cast<std::int32_t>(std::lround(std::clamp(x, -1.0, 1.0) * 8388608.0));
            const auto c = static_cast<std::uint32_t>(std::clamp(v, -8388608, 8388607));
            out.push_back(c & 0xFF);
            out.push_back((c >> 8) & 0xFF);
            out.push_back((c >> 16) & 0xFF);
            break;
        }
        case SampleFormat::Float32:
            put_u32(out, std::bit_cast<std::uint32_t>(static_cast<float>(x)));
            break;
    }
}

}  // namespace

StereoAudio decode(std::span<const std::uint8_t> bytes) {
    Reader r(bytes);
    if (r.tag() != "RIFF") throw ConfigError("not a RIFF file");
    r.u32();
    if (r.tag() != "WAVE") throw ConfigError("not a WAVE file");

    bool have_fmt = false;
    std::uint16_t channels = 0, bits = 0, block_align = 0;
    std::uint32_t rate = 0;
    SampleFormat format = SampleFormat::Pcm16;

    while (r.remaining() >= 8) {
        const std::string id = r.tag();
        const std::uint32_t size = r.u32();
        if (id == "fmt ") {
            if (size < 16) throw ConfigError("WAV fmt chunk too small");
            const std::size_t start = r.position();
            std::uint16_t tag = r.u16();
            channels = r.u16();
            rate = r.u32();
            r.u32();  // byte rate
            block_align = r.u16();
            bits = r.u16();
            if (tag == kFormatExtensible) {
                if (size < 40) throw ConfigError("WAV extensible fmt chunk too small");
                r.u16();  // cbSize
                r.u16();  // valid bits
                r.u32();  // channel mask
                tag = r.u16();  // first two bytes of the subformat GUID
            }
            r.skip(size - (r.position() - start));
            if (tag == kFormatPcm && bits == 16) format = SampleFormat::Pcm16;
            else if (tag == kFormatPcm && bits == 24) format = SampleFormat::Pcm24;
            else if (tag == kFormatFloat && bits == 32) format = SampleFormat::Float32;
            else
                throw ConfigError("unsupported WAV encoding (format " + std::to_string(tag) + ", " +
                                  std::to_string(bits) + " bits)");
            have_fmt = true;
        } else if (id == "data") {
            if (!have_fmt) throw ConfigError("WAV data chunk before fmt chunk");
            if (channels != 2) throw ConfigError("expected 2 channels, found " + std::to_string(channels));
            const int width = bytes_per_sample(format);
            if (block_align != 2 * width) throw ConfigError("inconsistent WAV block alignment");
            // Some writers leave the size field at its maximum when streaming.
            const std::size_t usable = std::min<std::size_t>(size, r.remaining());
            const auto data = r.take(usable - usable % block_align);
            const std::size_t frames = data.size() / block_align;
            StereoAudio audio;
            audio.sample_rate_hz = static_cast<int>(rate);
            audio.format = format;
            audio.left.resize(frames);
            audio.right.resize(frames);
            for (std::size_t i = 0; i < frames; ++i) {
                const std::uint8_t* frame = data.data() + i * block_align;
                audio.left[i] = sample_at(frame, format);
                audio.right[i] = sample_at(frame + width, format);
            }
            return audio;
        } else {
            r.skip(std::min<std::size_t>(size + (size & 1), r.remaining()));
        }
    }
    throw ConfigError("WAV file has no data chunk");
}

StereoAudio read(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open '" + path.string() + "'");
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    try {
        return decode(bytes);
    } catch (const ConfigError& e) {
        throw ConfigError(path.string() + ": " + e.what());
    }
}

std::vector<std::uint8_t> encode(const StereoAudio& audio) {
    if (audio.left.size() != audio.right.size()) throw ConfigError("channels differ in length");
    const int width = bytes_per_sample(audio.format);
    const auto data_size = static_cast<std::uint32_t>(audio.left.size() * 2 * width);
    const bool is_float = audio.format == SampleFormat::Float32;

    std::vector<std::uint8_t> out;
    out.reserve(44 + data_size);
    put_tag(out, "RIFF");
    put_u32(out, 36 + data_size);
    put_tag(out, "WAVE");
    put_tag(out, "fmt ");
    put_u32(out, 16);
    put_u16(out, is_float ? kFormatFloat : kFormatPcm);
    put_u16(out, 2);
    put_u32(out, static_cast<std::uint32_t>(audio.sample_rate_hz));
    put_u32(out, static_cast<std::uint32_t>(audio.sample_rate_hz) * 2 * width);
    put_u16(out, static_cast<std::uint16_t>(2 * width));
    put_u16(out, static_cast<std::uint16_t>(8 * width));
    put_tag(out, "data");
    put_u32(out, data_size);
    for (std::size_t i = 0; i < audio.left.size(); ++i) {
        put_sample(out, audio.left[i], audio.format);
        put_sample(out, audio.right[i], audio.format);
    }
    return out;
}

void write(const std::filesystem::path& path, const StereoAudio& audio) {
    const auto bytes = encode(audio);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw ConfigError("cannot write '" + path.string() + "'");
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw ConfigError("failed writing '" + path.string() + "'");
}

}  // namespace hpcal::wav
