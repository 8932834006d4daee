#include "qkdmg/link/transfer_cipher.hpp"

#include <openssl/evp.h>

#include <memory>
#include <stdexcept>

namespace qkdmg::link {

namespace {

struct CtxDeleter {
    void operator()(EVP_CIPHER_CTX* ctx) const { EVP_CIPHER_CTX_free(ctx); }
};
using CtxPtr = std::unique_ptr<EVP_CIPHER_CTX, CtxDeleter>;

constexpr std::size_t kNonceBytes = 12;

void check_key(std::span<const std::uint8_t> key) {
    if (key.size() != kTransferKeyBytes) {
        throw std::invalid_argument("transfer cipher requires a 128-bit key");
    }
}

}  // namespace

TransferCiphertext block_encrypt_transfer(std::span<const std::uint8_t> payload,
                                          std::span<const std::uint8_t> key) {
    check_key(key);
    CtxPtr ctx(EVP_CIPHER_CTX_new());
    if (!ctx) {
        throw std::runtime_error("cipher context allocation failed");
    }
    const std::uint8_t nonce[kNonceBytes] = {};
    if (EVP_EncryptInit_ex(ctx.get(), EVP_aes_128_gcm(), nullptr, key.data(), nonce) != 1) {
        throw std::runtime_error("cipher init failed");
    }
    TransferCiphertext out;
    out.body.resize(payload.size());
    int len = 0;
    if (!payload.empty() &&
        EVP_EncryptUpdate(ctx.get(), out.body.data(), &len, payload.data(),
                          static_cast<int>(payload.size())) != 1) {
        throw std::runtime_error("encryption failed");
    }
    int final_len = 0;
    if (EVP_EncryptFinal_ex(ctx.get(), out.body.data() + len, &final_len) != 1) {
        throw std::runtime_error("encryption finalization failed");
    }
    if (EVP_CIPHER_CTX_ctrl(ctx.get(), EVP_CTRL_GCM_GET_TAG, kTransferTagBytes,
                            out.tag.data()) != 1) {
        throw std::runtime_error("tag retrieval failed");
    }
    return out;
}

std::optional<std::vector<std::uint8_t>> block_decrypt_transfer(
    const TransferCiphertext& ciphertext, std::span<const std::uint8_t> key) {
    check_key(key);
    CtxPtr ctx(EVP_CIPHER_CTX_new());
    if (!ctx) {
        throw std::runtime_error("cipher context allocation failed");
    }
    const std::uint8_t nonce[kNonceBytes] = {};
    if (EVP_DecryptInit_ex(ctx.get(), EVP_aes_128_gcm(), nullptr, key.data(), nonce) != 1) {
        throw std::runtime_error("cipher init failed");
    }
    std::vector<std::uint8_t> plain(ciphertext.body.size());
    int len = 0;
    if (!ciphertext.body.empty() &&
        EVP_DecryptUpdate(ctx.get(), plain.data(), &len, ciphertext.body.data(),
                          static_cast<int>(ciphertext.body.size())) != 1) {
        return std::nullopt;
    }
    auto tag = ciphertext.tag;
    if (EVP_CIPHER_CTX_ctrl(ctx.get(), EVP_CTRL_GCM_SET_TAG, kTransferTagBytes,
                            tag.data()) != 1) {
        throw std::runtime_error("tag installation failed");
    }
    int final_len = 0;
    if (EVP_DecryptFinal_ex(ctx.get(), plain.data() + len, &final_len) != 1) {
        return std::nullopt;  // authentication failure
    }
    return plain;
}

}  // namespace qkdmg::link
