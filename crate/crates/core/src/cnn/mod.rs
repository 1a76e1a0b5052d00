//! From-scratch 1-D convolutional binary classifier.
//!
//! Six valid (no padding, stride 1) kernel-2 convolutions with tanh
//! activations, a mean-pool head with an affine map to one logit, and a
//! sigmoid output. Training is plain SGD on binary cross-entropy with a
//! halve-on-plateau learning-rate schedule.

mod activation;
mod checkpoint;
mod loss;
mod model;
mod schedule;
mod train;

pub use activation::{tanh_act, tanh_slice};
pub use checkpoint::{load_checkpoint, save_checkpoint};
pub use loss::{bce_loss, sigmoid, BCE_EPS};
pub use model::{
    ConvLayer, Grads, HeadLayer, Model, CONV_LAYERS, KERNEL_SIZE, MIN_INPUT_LEN, STANDARD_PLAN,
};
pub use schedule::lr_schedule_update;
pub use train::{
    dataset_loss, predict, sgd_step, train, train_resumed, EpochStats, FrameDataset, TrainConfig,
    WarmStart,
};
