"""Training objectives: image loss, message loss with KOA term, RSE loss, total.

All functions build on the autodiff graph and accept DiffNodes or plain arrays.
Default weights follow the reference setting: KOA weight 1.0, image weight 0.7,
RSE weight 0.5, temperature 0.1.
"""

from __future__ import annotations

from dataclasses import dataclass

from . import autodiff as ad


@dataclass(frozen=True)
class LossWeights:
    lambda1: float = 1.0   # KOA term inside the message loss
    lambda2: float = 0.7   # image loss
    lambda3: float = 0.5   # RSE loss
    tau: float = 0.1       # contrastive temperature

    def validate(self):
        for name in ("lambda1", "lambda2", "lambda3", "tau"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be > 0, got {getattr(self, name)}")
        return self


def image_loss(host, watermarked):
    """MSE between host and watermarked pixels (visual imperceptibility)."""
    return ad.mse(ad.as_node(host), ad.as_node(watermarked))


def rse_loss(res_anchor, res_same_host, res_other_host, tau=0.1):
    """Residual specificity enhancement: a two-way contrastive term.

    Pulls the anchor residual toward the residual of the same host under a
    different message and pushes it away from the residual of a different host
    under the same message:

        -log( e^{sim(a,p)/tau} / (e^{sim(a,p)/tau} + e^{sim(a,n)/tau}) )

    computed as softplus((sim(a,n) - sim(a,p)) / tau) for stability.  Residuals
    are flattened for the cosine similarities; a zero-norm residual yields
    similarity 0 with a warning rather than an error.
    """
    sim_pos = ad.cosine_similarity(ad.as_node(res_anchor), ad.as_node(res_same_host))
    sim_neg = ad.cosine_similarity(ad.as_node(res_anchor), ad.as_node(res_other_host))
    return ad.softplus(ad.scale(sim_neg - sim_pos, 1.0 / tau))


def koa_loss(true_bits, soft_from_tampered):
    """MSE between the true bits and the decoder output on a tampered image."""
    return ad.mse(ad.as_node(true_bits), ad.as_node(soft_from_tampered))


def message_loss(true_bits, soft_after_channel, koa_term=None, lambda1=1.0):
    """MSE(bits, decoded) plus the weighted KOA term (0 when KNL is off)."""
    mes = ad.mse(ad.as_node(true_bits), ad.as_node(soft_after_channel))
    if koa_term is None:
        return mes
    return mes + ad.scale(ad.as_node(koa_term), lambda1)


def total_loss(mes, img, rse=None, lambda2=0.7, lambda3=0.5):
    """mes + lambda2 * img + lambda3 * rse (rse dropped when RSE is off)."""
    out = ad.as_node(mes) + ad.scale(ad.as_node(img), lambda2)
    if rse is not None:
        out = out + ad.scale(ad.as_node(rse), lambda3)
    return out
