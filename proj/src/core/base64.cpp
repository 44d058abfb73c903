#include "core/base64.hpp"

#include "core/errors.hpp"

#include <array>

namespace opf::base64 {
namespace {

constexpr char kAlphabet[] = "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";

std::array<int8_t, 256> build_reverse() {
    std::array<int8_t, 256> rev;
    rev.fill(-1);
    for (int i = 0; i < 64; ++i)
        rev[static_cast<unsigned char>(kAlphabet[i])] = static_cast<int8_t>(i);
    return rev;
}

const std::array<int8_t, 256> kReverse = build_reverse();

std::string encode_bytes(const uint8_t* data, size_t n) {
    std::string out;
    out.reserve((n + 2) / 3 * 4);
    size_t i = 0;
    for (; i + 3 <= n; i += 3) {
        uint32_t v = (static_cast<uint32_t>(data[i]) << 16) |
                     (static_cast<uint32_t>(data[i + 1]) << 8) | data[i + 2];
        out.push_back(kAlphabet[(v >> 18) & 63]);
        out.push_back(kAlphabet[(v >> 12) & 63]);
        out.push_back(kAlphabet[(v >> 6) & 63]);
        out.push_back(kAlphabet[v & 63]);
    }
    size_t rest = n - i;
    if (rest == 1) {
        uint32_t v = static_cast<uint32_t>(data[i]) << 16;
        out.push_back(kAlphabet[(v >> 18) & 63]);
        out.push_back(kAlphabet[(v >> 12) & 63]);
        out.push_back('=');
        out.push_back('=');
    } else if (rest == 2) {
        uint32_t v = (static_cast<uint32_t>(data[i]) << 16) |
                     (static_cast<uint32_t>(data[i + 1]) << 8);
        out.push_back(kAlphabet[(v >> 18) & 63]);
        out.push_back(kAlphabet[(v >> 12) & 63]);
        out.push_back(kAlphabet[(v >> 6) & 63]);
        out.push_back('=');
    }
    return out;
}

} // namespace

std::string encode(const std::vector<uint8_t>& data) {
    return encode_bytes(data.data(), data.size());
}

std::string encode(std::string_view data) {
    return encode_bytes(reinterpret_cast<const uint8_t*>(data.data()), data.size());
}

std::vector<uint8_t> decode(std::string_view text) {
    if (text.size() % 4 != 0)
        raise(Errc::parse, "base64 length must be a multiple of 4");
    std::vector<uint8_t> out;
    out.reserve(text.size() / 4 * 3);
    for (size_t i = 0; i < text.size(); i += 4) {
        bool last = i + 4 == text.size();
        int pad = 0;
        uint32_t v = 0;
        for (size_t k = 0; k < 4; ++k) {
            char c = text[i + k];
            if (c == '=') {
                if (!last || k < 2)
                    raise(Errc::parse, "base64 padding in the middle of the input");
                ++pad;
                v <<= 6;
                continue;
            }
            if (pad > 0)
                raise(Errc::parse, "base64 data after padding");
            int8_t d = kReverse[static_cast<unsigned char>(c)];
            if (d < 0)
                raise(Errc::parse, "invalid base64 character");
            v = (v << 6) | static_cast<uint32_t>(d);
        }
        out.push_back(static_cast<uint8_t>((v >> 16) & 0xff));
        if (pad < 2)
            out.push_back(static_cast<uint8_t>((v >> 8) & 0xff));
        if (pad < 1)
            out.push_back(static_cast<uint8_t>(v & 0xff));
    }
    return out;
}

} // namespace opf::base64
