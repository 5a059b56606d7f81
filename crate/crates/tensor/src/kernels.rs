//! Raw forward/backward kernels over [`Tensor`] values, used by the tape.

use crate::error::{shape_err, Result};
use crate::{Scalar, Tensor};

/// Stabilizing constants of SSIM for unit dynamic range: `(0.01)^2` and `(0.03)^2`.
pub const SSIM_C1: f64 = 1e-4;
pub const SSIM_C2: f64 = 9e-4;

#[derive(Debug, Clone, Copy)]
pub(crate) struct ConvGeom {
    pub batch: usize,
    pub in_ch: usize,
    pub h: usize,
    pub w: usize,
    pub out_ch: usize,
    pub kh: usize,
    pub kw: usize,
    pub stride: usize,
    pub pad: usize,
    pub ho: usize,
    pub wo: usize,
}

impl ConvGeom {
    pub fn new<S: Scalar>(
        x: &Tensor<S>,
        weight: &Tensor<S>,
        stride: usize,
        pad: usize,
    ) -> Result<Self> {
        let (batch, in_ch, h, w) = x.dims4("conv2d")?;
        let (out_ch, wc, kh, kw) = weight.dims4("conv2d")?;
        if wc != in_ch {
            return Err(shape_err(
                "conv2d",
                format!("input has {in_ch} channels, kernel expects {wc}"),
            ));
        }
        if stride == 0 {
            return Err(shape_err("conv2d", "stride must be positive"));
        }
        if h + 2 * pad < kh || w + 2 * pad < kw {
            return Err(shape_err(
                "conv2d",
                format!("kernel {kh}x{kw} larger than padded input {h}x{w} (pad {pad})"),
            ));
        }
        Ok(Self {
            batch,
            in_ch,
            h,
            w,
            out_ch,
            kh,
            kw,
            stride,
            pad,
            ho: (h + 2 * pad - kh) / stride + 1,
            wo: (w + 2 * pad - kw) / stride + 1,
        })
    }

    fn patch_len(&self) -> usize {
        self.in_ch * self.kh * self.kw
    }

    fn out_len(&self) -> usize {
        self.ho * self.wo
    }

    /// Source pixel index for kernel tap `(ki, kj)` at output `(oy, ox)`, if inside the input.
    #[inline]
    fn source(&self, ki: usize, kj: usize, oy: usize, ox: usize) -> Option<(usize, usize)> {
        let iy = (oy * self.stride + ki).checked_sub(self.pad)?;
        let ix = (ox * self.stride + kj).checked_sub(self.pad)?;
        (iy < self.h && ix < self.w).then_some((iy, ix))
    }

    fn im2col<S: Scalar>(&self, x: &[S], cols: &mut [S]) {
        let n = self.out_len();
        for ci in 0..self.in_ch {
            let plane = &x[ci * self.h * self.w..(ci + 1) * self.h * self.w];
            for ki in 0..self.kh {
                for kj in 0..self.kw {
                    let row = (ci * self.kh + ki) * self.kw + kj;
                    let dst = &mut cols[row * n..(row + 1) * n];
                    for oy in 0..self.ho {
                        for ox in 0..self.wo {
                            dst[oy * self.wo + ox] = match self.source(ki, kj, oy, ox) {
                                Some((iy, ix)) => plane[iy * self.w + ix],
                                None => S::zero(),
                            };
                        }
                    }
                }
            }
        }
    }

    fn col2im<S: Scalar>(&self, cols: &[S], dx: &mut [S]) {
        let n = self.out_len();
        for ci in 0..self.in_ch {
            let plane = &mut dx[ci * self.h * self.w..(ci + 1) * self.h * self.w];
            for ki in 0..self.kh {
                for kj in 0..self.kw {
                    let row = (ci * self.kh + ki) * self.kw + kj;
                    let src = &cols[row * n..(row + 1) * n];
                    for oy in 0..self.ho {
                        for ox in 0..self.wo {
                            if let Some((iy, ix)) = self.source(ki, kj, oy, ox) {
                                let v = &mut plane[iy * self.w + ix];
                                *v = *v + src[oy * self.wo + ox];
                            }
                        }
                    }
                }
            }
        }
    }
}

pub(crate) fn conv2d_forward<S: Scalar>(
    x: &Tensor<S>,
    weight: &Tensor<S>,
    bias: Option<&Tensor<S>>,
    stride: usize,
    pad: usize,
) -> Result<Tensor<S>> {
    let g = ConvGeom::new(x, weight, stride, pad)?;
    if let Some(b) = bias {
        if b.len() != g.out_ch {
            return Err(shape_err(
                "conv2d",
                format!("bias has {} entries for {} output channels", b.len(), g.out_ch),
            ));
        }
    }
    let (k, n) = (g.patch_len(), g.out_len());
    let in_len = g.in_ch * g.h * g.w;
    let mut out = Tensor::zeros([g.batch, g.out_ch, g.ho, g.wo]);
    let mut cols = vec![S::zero(); k * n];
    for bi in 0..g.batch {
        g.im2col(&x.data()[bi * in_len..(bi + 1) * in_len], &mut cols);
        let dst = &mut out.data_mut()[bi * g.out_ch * n..(bi + 1) * g.out_ch * n];
        if let Some(b) = bias {
            for (o, row) in dst.chunks_mut(n).enumerate() {
                row.fill(b.data()[o]);
            }
        }
        let beta = if bias.is_some() { S::one() } else { S::zero() };
        S::gemm(
            g.out_ch,
            k,
            n,
            S::one(),
            weight.data(),
            k as isize,
            1,
            &cols,
            n as isize,
            1,
            beta,
            dst,
            n as isize,
            1,
        );
    }
    Ok(out)
}

pub(crate) struct ConvGrads<S> {
    pub dx: Option<Tensor<S>>,
    pub dw: Option<Tensor<S>>,
    pub db: Option<Tensor<S>>,
}

pub(crate) fn conv2d_backward<S: Scalar>(
    x: &Tensor<S>,
    weight: &Tensor<S>,
    grad_out: &Tensor<S>,
    stride: usize,
    pad: usize,
    need: [bool; 3],
) -> Result<ConvGrads<S>> {
    let g = ConvGeom::new(x, weight, stride, pad)?;
    let (k, n) = (g.patch_len(), g.out_len());
    let in_len = g.in_ch * g.h * g.w;
    let mut dx = need[0].then(|| Tensor::zeros(x.shape().to_vec()));
    let mut dw = need[1].then(|| Tensor::zeros(weight.shape().to_vec()));
    let mut db = need[2].then(|| Tensor::zeros([g.out_ch]));
    let mut cols = vec![S::zero(); k * n];
    for bi in 0..g.batch {
        let go = &grad_out.data()[bi * g.out_ch * n..(bi + 1) * g.out_ch * n];
        if let Some(db) = db.as_mut() {
            for (o, row) in go.chunks(n).enumerate() {
                let s: S = row.iter().copied().sum();
                db.data_mut()[o] = db.data()[o] + s;
            }
        }
        if let Some(dw) = dw.as_mut() {
            g.im2col(&x.data()[bi * in_len..(bi + 1) * in_len], &mut cols);
            S::gemm(
                g.out_ch,
                n,
                k,
                S::one(),
                go,
                n as isize,
                1,
                &cols,
                1,
                n as isize,
                S::one(),
                dw.data_mut(),
                k as isize,
                1,
            );
        }
        if let Some(dx) = dx.as_mut() {
            S::gemm(
                k,
                g.out_ch,
                n,
                S::one(),
                weight.data(),
                1,
                k as isize,
                go,
                n as isize,
                1,
                S::zero(),
                &mut cols,
                n as isize,
                1,
            );
            g.col2im(&cols, &mut dx.data_mut()[bi * in_len..(bi + 1) * in_len]);
        }
    }
    Ok(ConvGrads { dx, dw, db })
}

pub(crate) fn upsample_forward<S: Scalar>(x: &Tensor<S>, fy: usize, fx: usize) -> Result<Tensor<S>> {
    let (b, c, h, w) = x.dims4("upsample")?;
    if fy == 0 || fx == 0 {
        return Err(shape_err("upsample", "factors must be positive"));
    }
    let (oh, ow) = (h * fy, w * fx);
    let src = x.data();
    Ok(Tensor::from_fn([b, c, oh, ow], |i| {
        let plane = i / (oh * ow);
        let rem = i % (oh * ow);
        let (y, xx) = (rem / ow, rem % ow);
        src[plane * h * w + (y / fy) * w + xx / fx]
    }))
}

pub(crate) fn upsample_backward<S: Scalar>(
    x_shape: &[usize],
    grad_out: &Tensor<S>,
    fy: usize,
    fx: usize,
) -> Tensor<S> {
    let (h, w) = (x_shape[2], x_shape[3]);
    let (oh, ow) = (h * fy, w * fx);
    let mut dx = Tensor::zeros(x_shape.to_vec());
    let planes = x_shape[0] * x_shape[1];
    let go = grad_out.data();
    let d = dx.data_mut();
    for p in 0..planes {
        for y in 0..oh {
            for xx in 0..ow {
                let t = &mut d[p * h * w + (y / fy) * w + xx / fx];
                *t = *t + go[p * oh * ow + y * ow + xx];
            }
        }
    }
    dx
}

pub(crate) fn concat_forward<S: Scalar>(a: &Tensor<S>, b: &Tensor<S>) -> Result<Tensor<S>> {
    let (ba, ca, ha, wa) = a.dims4("concat")?;
    let (bb, cb, hb, wb) = b.dims4("concat")?;
    if (ba, ha, wa) != (bb, hb, wb) {
        return Err(shape_err(
            "concat",
            format!("{:?} vs {:?}", a.shape(), b.shape()),
        ));
    }
    let plane = ha * wa;
    let mut data = Vec::with_capacity(a.len() + b.len());
    for i in 0..ba {
        data.extend_from_slice(&a.data()[i * ca * plane..(i + 1) * ca * plane]);
        data.extend_from_slice(&b.data()[i * cb * plane..(i + 1) * cb * plane]);
    }
    Tensor::new([ba, ca + cb, ha, wa], data)
}

pub(crate) fn concat_backward<S: Scalar>(
    a_shape: &[usize],
    b_shape: &[usize],
    grad_out: &Tensor<S>,
) -> (Tensor<S>, Tensor<S>) {
    let (batch, ca, cb) = (a_shape[0], a_shape[1], b_shape[1]);
    let plane = a_shape[2] * a_shape[3];
    let mut da = Vec::with_capacity(batch * ca * plane);
    let mut db = Vec::with_capacity(batch * cb * plane);
    for chunk in grad_out.data().chunks((ca + cb) * plane) {
        da.extend_from_slice(&chunk[..ca * plane]);
        db.extend_from_slice(&chunk[ca * plane..]);
    }
    (
        Tensor::new(a_shape.to_vec(), da).expect("concat grad shape"),
        Tensor::new(b_shape.to_vec(), db).expect("concat grad shape"),
    )
}

/// Population statistics of a pair of equally sized samples.
#[derive(Debug, Clone, Copy)]
pub struct PairStats<S> {
    pub mean_u: S,
    pub mean_v: S,
    pub var_u: S,
    pub var_v: S,
    pub cov: S,
}

pub fn pair_stats<S: Scalar>(u: &[S], v: &[S]) -> PairStats<S> {
    let n = S::of(u.len() as f64);
    let mean_u = u.iter().copied().sum::<S>() / n;
    let mean_v = v.iter().copied().sum::<S>() / n;
    let (mut var_u, mut var_v, mut cov) = (S::zero(), S::zero(), S::zero());
    for (&a, &b) in u.iter().zip(v) {
        let (da, db) = (a - mean_u, b - mean_v);
        var_u = var_u + da * da;
        var_v = var_v + db * db;
        cov = cov + da * db;
    }
    PairStats {
        mean_u,
        mean_v,
        var_u: var_u / n,
        var_v: var_v / n,
        cov: cov / n,
    }
}

struct SsimTerms<S> {
    lum_num: S,
    cs_num: S,
    lum_den: S,
    cs_den: S,
}

impl<S: Scalar> SsimTerms<S> {
    fn new(s: &PairStats<S>) -> Self {
        let two = S::of(2.0);
        let (c1, c2) = (S::of(SSIM_C1), S::of(SSIM_C2));
        Self {
            lum_num: two * s.mean_u * s.mean_v + c1,
            cs_num: two * s.cov + c2,
            lum_den: s.mean_u * s.mean_u + s.mean_v * s.mean_v + c1,
            cs_den: s.var_u + s.var_v + c2,
        }
    }

    fn value(&self) -> S {
        (self.lum_num * self.cs_num) / (self.lum_den * self.cs_den)
    }
}

/// SSIM of two equally sized images using whole-image statistics.
pub fn global_ssim<S: Scalar>(u: &[S], v: &[S]) -> S {
    SsimTerms::new(&pair_stats(u, v)).value()
}

/// Number of independent samples an SSIM/MSE reduction treats a tensor as.
pub(crate) fn sample_count<S: Scalar>(t: &Tensor<S>) -> usize {
    if t.shape().len() == 4 {
        t.shape()[0]
    } else {
        1
    }
}

/// Mean over samples of [`global_ssim`].
pub(crate) fn ssim_forward<S: Scalar>(u: &Tensor<S>, v: &Tensor<S>) -> S {
    let count = sample_count(u);
    let per = u.len() / count;
    let total: S = (0..count)
        .map(|i| global_ssim(&u.data()[i * per..(i + 1) * per], &v.data()[i * per..(i + 1) * per]))
        .sum();
    total / S::of(count as f64)
}

/// Gradients of the batch-mean SSIM w.r.t. both inputs, scaled by `upstream`.
pub(crate) fn ssim_backward<S: Scalar>(
    u: &Tensor<S>,
    v: &Tensor<S>,
    upstream: S,
) -> (Tensor<S>, Tensor<S>) {
    let count = sample_count(u);
    let per = u.len() / count;
    let two = S::of(2.0);
    let n = S::of(per as f64);
    let mut du = Tensor::zeros(u.shape().to_vec());
    let mut dv = Tensor::zeros(v.shape().to_vec());
    for i in 0..count {
        let range = i * per..(i + 1) * per;
        let (us, vs) = (&u.data()[range.clone()], &v.data()[range.clone()]);
        let st = pair_stats(us, vs);
        let t = SsimTerms::new(&st);
        let scale = t.value() * upstream / S::of(count as f64);
        // d ln(SSIM) / d u_i splits into per-term logarithmic derivatives.
        let gu_const = two * st.mean_v / (n * t.lum_num) - two * st.mean_u / (n * t.lum_den);
        let gv_const = two * st.mean_u / (n * t.lum_num) - two * st.mean_v / (n * t.lum_den);
        let du_s = &mut du.data_mut()[range.clone()];
        for (k, d) in du_s.iter_mut().enumerate() {
            let g = gu_const + two * (vs[k] - st.mean_v) / (n * t.cs_num)
                - two * (us[k] - st.mean_u) / (n * t.cs_den);
            *d = scale * g;
        }
        let dv_s = &mut dv.data_mut()[range];
        for (k, d) in dv_s.iter_mut().enumerate() {
            let g = gv_const + two * (us[k] - st.mean_u) / (n * t.cs_num)
                - two * (vs[k] - st.mean_v) / (n * t.cs_den);
            *d = scale * g;
        }
    }
    (du, dv)
}
