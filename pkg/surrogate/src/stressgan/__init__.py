"""stressgan: conditional-GAN surrogate and SE-RES baseline for von Mises
stress-field prediction, trained from SGF1 dataset files."""

from .models import (
    ConfigurationError,
    Discriminator,
    DiscriminatorSpec,
    Generator,
    GeneratorSpec,
    SRN,
    SRNSpec,
    build_discriminator,
    build_generator,
    build_srn,
)
from .trainer import (
    TrainConfig,
    discriminator_probe,
    gan_step,
    l2_loss,
    load_checkpoint,
    predict,
    train,
)

__version__ = "0.1.0"
